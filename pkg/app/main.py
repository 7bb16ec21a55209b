# app/main.py
import os
import asyncio
import logging
from typing import NoReturn

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse

from app.config import APP_TITLE, APP_DESCRIPTION, APP_VERSION, RESULTS_DIR, LOG_FORMAT, LOG_LEVEL
from app.exceptions import EnumerationBudgetExceeded, PIRError
from app.models.schemas import (
    AnalyzeRequest,
    CollusionReportModel,
    JobStatus,
    RetrievalReport,
    RetrieveRequest,
    VerifyRequest,
)
from app.services.experiment_service import ExperimentService
from app.services.job_service import JobService
from app.utils.json_utils import sanitize_for_json

logging.basicConfig(level=getattr(logging, LOG_LEVEL), format=LOG_FORMAT)
logger = logging.getLogger(__name__)

job_service = JobService()
experiment_service = ExperimentService(job_service)

app = FastAPI(
    title=APP_TITLE,
    description=APP_DESCRIPTION,
    version=APP_VERSION,
    docs_url="/docs",
    redoc_url="/redoc"
)

# Configurar CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _raise_http(e: Exception, action: str) -> NoReturn:
    """Recusas de orçamento -> 413, erros de entrada -> 400, demais -> 500"""
    if isinstance(e, EnumerationBudgetExceeded):
        logger.warning(f"{action}: {e}")
        raise HTTPException(status_code=413, detail=str(e))
    if isinstance(e, PIRError):
        logger.warning(f"{action}: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    logger.exception(f"Erro inesperado em {action}")
    raise HTTPException(status_code=500, detail=f"Erro em {action}: {str(e)}")


@app.on_event("startup")
async def startup_event():
    """Evento executado na inicialização do aplicativo"""
    if not os.path.exists(RESULTS_DIR):
        os.makedirs(RESULTS_DIR)
        logger.info(f"Diretório criado: {RESULTS_DIR}")


@app.post("/retrieve", response_model=RetrievalReport, summary="Executar uma recuperação privada")
async def retrieve(request: RetrieveRequest):
    try:
        report, _ = await asyncio.to_thread(experiment_service.run_retrieval, request.config, request.phis)
        return report
    except Exception as e:
        _raise_http(e, "recuperação")


@app.post("/analyze", response_model=CollusionReportModel, summary="Ataque por posto de servidores coniventes")
async def analyze(request: AnalyzeRequest):
    try:
        report = experiment_service.run_analysis(request.config, request.colluders, request.phi)
        return CollusionReportModel(**report.to_dict())
    except Exception as e:
        _raise_http(e, "análise")


@app.get("/bound/{graph}", summary="Limitantes de taxa de um grafo")
async def bound(graph: str):
    """
    Limitantes δ/n, 2/s (grafos regulares) e o inverso do ótimo do PL,
    comparados à taxa 1/s obtida. Frações como "p/q".
    """
    try:
        return sanitize_for_json(experiment_service.bound(graph).to_dict())
    except Exception as e:
        _raise_http(e, "limitantes")


@app.get("/table1", summary="Reprodução das linhas de Petersen e bipartido completo")
async def table1(certify: bool = False, q: int = 3):
    try:
        df = await asyncio.to_thread(experiment_service.table1, certify, q)
        return sanitize_for_json(df.to_dict(orient="records"))
    except Exception as e:
        _raise_http(e, "tabela")


@app.get("/table1/excel", summary="Tabela em Excel")
async def table1_excel():
    try:
        path = await asyncio.to_thread(experiment_service.table1_excel)
    except Exception as e:
        _raise_http(e, "tabela em Excel")
    return FileResponse(
        path=path,
        filename="table1.xlsx",
        media_type="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"
    )


@app.post("/verify", response_model=JobStatus, summary="Iniciar verificação exata em segundo plano")
async def verify(request: VerifyRequest):
    try:
        job_id = await experiment_service.start_verification(request)
        return JobStatus(**job_service.get_job(job_id))
    except Exception as e:
        _raise_http(e, "verificação")


@app.get("/job/{job_id}", response_model=JobStatus)
async def get_job_status(job_id: str):
    job = job_service.get_job(job_id)
    if not job:
        logger.error(f"Job não encontrado: {job_id}")
        raise HTTPException(status_code=404, detail=f"Job não encontrado: {job_id}")
    return JobStatus(**job)


@app.get("/jobs", summary="Listar todos os jobs")
async def list_jobs():
    return job_service.list_jobs()


@app.get("/", summary="Verificar status da API")
async def root():
    """
    Verifica se a API está funcionando.
    """
    return {
        "message": "API de recuperação privada em sistemas de replicação está funcionando",
        "swagger_ui": "Acesse /docs para a interface interativa",
        "status": "online",
        "version": APP_VERSION
    }


# Entrada principal da aplicação
if __name__ == "__main__":
    import uvicorn

    print(f"\nAcesse o Swagger UI: http://localhost:8000/docs")
    uvicorn.run("app.main:app", host="0.0.0.0", port=8000, reload=True)
