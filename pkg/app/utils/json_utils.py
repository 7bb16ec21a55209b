# app/utils/json_utils.py
import json
import math
import logging
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np

logger = logging.getLogger(__name__)


def is_json_serializable(obj: Any) -> bool:
    """
    Verifica se um objeto é serializável para JSON
    """
    try:
        json.dumps(obj)
        return True
    except (TypeError, OverflowError):
        return False


def sanitize_for_json(obj: Any, max_depth: int = 100, current_depth: int = 0) -> Any:
    """
    Converte recursivamente um relatório para tipos JSON.
    Frações viram "p/q", escalares e arrays numpy viram números e listas,
    e infinito (cintura de grafo acíclico) vira a string "inf".
    """
    if current_depth > max_depth:
        logger.warning(f"Profundidade máxima de recursão atingida ({max_depth})")
        return None

    if obj is None or isinstance(obj, (bool, str)):
        return obj

    if isinstance(obj, Fraction):
        return str(obj)

    if isinstance(obj, np.ndarray):
        return sanitize_for_json(obj.tolist(), max_depth, current_depth + 1)

    if isinstance(obj, np.generic):
        return sanitize_for_json(obj.item(), max_depth, current_depth + 1)

    if isinstance(obj, int):
        return obj

    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            logger.debug("Valor NaN substituído por None")
            return None
        return obj

    if isinstance(obj, dict):
        return {str(k): sanitize_for_json(v, max_depth, current_depth + 1) for k, v in obj.items()}

    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [sanitize_for_json(item, max_depth, current_depth + 1) for item in items]

    if hasattr(obj, "model_dump"):
        return sanitize_for_json(obj.model_dump(), max_depth, current_depth + 1)

    if is_json_serializable(obj):
        return obj

    logger.warning(f"Objeto do tipo {type(obj).__name__} convertido para string")
    return str(obj)


def safe_json_dump(obj: Any, file_path: str, **kwargs) -> bool:
    """
    Salva um objeto como JSON de forma segura, garantindo sanitização prévia
    """
    try:
        sanitized_obj = sanitize_for_json(obj)

        if 'indent' not in kwargs:
            kwargs['indent'] = 2
        if 'ensure_ascii' not in kwargs:
            kwargs['ensure_ascii'] = False

        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(sanitized_obj, f, **kwargs)

        return True
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Erro ao salvar JSON em {file_path}: {str(e)}")
        return False


def _format_value(value: Any) -> str:
    value = sanitize_for_json(value)
    if isinstance(value, list):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}" if abs(value) >= 1e-6 or value == 0 else repr(value)
    return "" if value is None else str(value)


def to_key_value_lines(report: Dict[str, Any]) -> List[str]:
    """
    Relatório em linhas `chave=valor`, na ordem das chaves

    Listas viram valores separados por vírgula.
    """
    return [f"{key}={_format_value(value)}" for key, value in report.items()]
