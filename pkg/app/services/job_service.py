# app/services/job_service.py
import logging
import uuid
from datetime import datetime
from typing import Dict, Any, Optional

logger = logging.getLogger(__name__)


class JobService:
    """Serviço para gerenciamento de jobs de verificação em segundo plano"""

    def __init__(self):
        """Inicializa o serviço de jobs"""
        self.jobs: Dict[str, Dict[str, Any]] = {}

    def create_job(self, kind: str, params: Dict[str, Any], job_id: Optional[str] = None) -> str:
        """
        Cria um novo job

        Args:
            kind: Tipo do job (ex.: "verify")
            params: Parâmetros de entrada
            job_id: ID opcional do job (se não fornecido, será gerado um UUID)

        Returns:
            str: ID do job criado
        """
        if not job_id:
            job_id = str(uuid.uuid4())

        self.jobs[job_id] = {
            "job_id": job_id,
            "status": "processing",
            "progress": 0.0,
            "kind": kind,
            "params": params,
            "created_at": datetime.now().isoformat(),
            "result": None,
            "error": None,
        }
        logger.info(f"Job {job_id} criado ({kind})")
        return job_id

    def get_job(self, job_id: str) -> Optional[Dict[str, Any]]:
        return self.jobs.get(job_id)

    def list_jobs(self) -> Dict[str, Dict[str, Any]]:
        """
        Lista todos os jobs

        Returns:
            Dict: Resumo de cada job
        """
        return {
            job_id: {
                "status": job["status"],
                "progress": job["progress"],
                "kind": job["kind"],
                "created_at": job["created_at"],
            }
            for job_id, job in self.jobs.items()
        }

    def update_progress(self, job_id: str, progress: float) -> None:
        if job_id not in self.jobs:
            logger.warning(f"Tentativa de atualizar job inexistente: {job_id}")
            return
        self.jobs[job_id]["progress"] = max(0.0, min(1.0, progress))

    def complete_job(self, job_id: str, result: Dict[str, Any]) -> None:
        job = self.jobs.get(job_id)
        if job is None:
            logger.warning(f"Tentativa de concluir job inexistente: {job_id}")
            return
        job["status"] = "completed"
        job["progress"] = 1.0
        job["result"] = result
        logger.info(f"Job {job_id} concluído")

    def fail_job(self, job_id: str, error: str) -> None:
        job = self.jobs.get(job_id)
        if job is None:
            logger.warning(f"Tentativa de marcar falha em job inexistente: {job_id}")
            return
        job["status"] = "failed"
        job["error"] = error
        logger.error(f"Job {job_id} falhou: {error}")
