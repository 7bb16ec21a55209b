# app/models/schemas.py
from pydantic import BaseModel, Field, ConfigDict, field_validator, model_validator
from typing import Dict, Any, Optional, List, Literal

from app.config import DEFAULT_FIELD_Q, DEFAULT_FILE_LENGTH, DEFAULT_SEED

ProtocolName = Literal["rep2", "repR", "reduced", "coded"]
CodeName = Literal["rs", "parity", "repetition"]


class ExperimentConfig(BaseModel):
    """Configuração de um experimento de recuperação"""
    graph: str = Field(..., description="Nome de família (ex.: petersen, cycle(5)) ou caminho de arquivo de grafo")
    q: int = DEFAULT_FIELD_Q
    f: int = DEFAULT_FILE_LENGTH
    seed: int = DEFAULT_SEED
    protocol: ProtocolName = "rep2"
    dataset: Optional[str] = Field(None, description="Arquivo de dados; se ausente, dados aleatórios pela semente")
    code: CodeName = "rs"
    N: Optional[int] = None
    K: Optional[int] = None
    partition: Optional[str] = Field(None, description="Partes separadas por ';', ex.: 1-4;5-8;9-12")
    girth: Optional[int] = Field(None, description="Para 'reduced': proíbe ciclos de comprimento <= girth em Ĝ_c")
    reuse_randomness: bool = False
    output: Optional[str] = None

    model_config = ConfigDict(protected_namespaces=())

    @field_validator("q")
    @classmethod
    def check_q(cls, v: int) -> int:
        if v < 3:
            raise ValueError("q deve ser >= 3")
        return v

    @field_validator("f")
    @classmethod
    def check_f(cls, v: int) -> int:
        if v < 1:
            raise ValueError("f deve ser >= 1")
        return v

    @model_validator(mode="after")
    def check_coded(self) -> "ExperimentConfig":
        if self.protocol == "coded" and self.code == "rs" and (self.N is None or self.K is None):
            raise ValueError("O código Reed-Solomon exige N e K")
        return self


class RetrieveRequest(BaseModel):
    config: ExperimentConfig
    phis: List[int] = Field(..., min_length=1)


class AnalyzeRequest(BaseModel):
    config: ExperimentConfig
    colluders: List[int] = Field(..., min_length=1)
    phi: int


class VerifyRequest(BaseModel):
    graph: str
    q: int = 3
    budget: Optional[int] = None
    samples: int = 20
    seed: int = DEFAULT_SEED


class RetrievalReport(BaseModel):
    """Resultado de uma recuperação de ponta a ponta"""
    protocol: str
    graph: str
    s: int
    n: int
    q: int
    f: int
    phis: List[int]
    files: List[List[int]]
    correct: bool
    upload: int
    download: int
    rate: str
    storage_overhead: float


class CollusionReportModel(BaseModel):
    colluders: List[int]
    acyclic: bool
    cycles: int
    cycle_ranks: List[str]
    candidates: List[int]
    candidate_count: int
    leakage_bits: float
    phi: Optional[int] = None


class JobStatus(BaseModel):
    """Modelo para status de um job de verificação"""
    job_id: str
    status: str
    progress: float = 0.0
    kind: str
    params: Dict[str, Any] = {}
    created_at: str
    result: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    model_config = ConfigDict(protected_namespaces=())
