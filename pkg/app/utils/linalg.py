# app/utils/linalg.py
import logging
from typing import Tuple

import numpy as np

from app.exceptions import FieldError

logger = logging.getLogger(__name__)


def _row_reduce(matrix, q: int) -> Tuple[np.ndarray, list]:
    """Escalonamento de Gauss-Jordan sobre F_q; devolve a forma reduzida e as colunas pivô"""
    A = np.array(matrix, dtype=object) % q
    if A.ndim != 2:
        raise FieldError(f"Matriz esperada, recebido array com {A.ndim} dimensões")
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = next((i for i in range(r, rows) if A[i, c] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            A[[r, pivot], :] = A[[pivot, r], :]
        inv = pow(int(A[r, c]), q - 2, q)
        A[r, :] = (A[r, :] * inv) % q
        for i in range(rows):
            if i != r and A[i, c] != 0:
                A[i, :] = (A[i, :] - A[i, c] * A[r, :]) % q
        pivots.append(c)
        r += 1
    return A, pivots


def rank_mod(matrix, q: int) -> int:
    """Posto exato de uma matriz sobre F_q"""
    A = np.asarray(matrix)
    if A.size == 0:
        return 0
    _, pivots = _row_reduce(A, q)
    return len(pivots)


def solve_mod(a, b, q: int) -> np.ndarray:
    """
    Resolve x·A = b (vetor linha) ou X·A = B (linhas) para A quadrada e invertível

    Args:
        a: Matriz quadrada k×k
        b: Vetor de comprimento k ou matriz m×k
        q: Módulo primo

    Returns:
        np.ndarray: Solução com o mesmo formato de b (dtype object)
    """
    A = np.array(a, dtype=object) % q
    k = A.shape[0]
    if A.shape != (k, k):
        raise FieldError(f"Sistema não quadrado: {A.shape}")
    B = np.atleast_2d(np.array(b, dtype=object) % q)
    # x·A = b  <=>  Aᵀ·xᵀ = bᵀ
    augmented = np.concatenate([A.T, B.T], axis=1)
    reduced, pivots = _row_reduce(augmented, q)
    if pivots[:k] != list(range(k)) or len(pivots) > k:
        raise FieldError("Sistema singular sobre o corpo")
    solution = reduced[:k, k:].T
    return solution[0] if np.ndim(b) == 1 else solution


def inverse_mod(a, q: int) -> np.ndarray:
    """Inversa exata de uma matriz quadrada sobre F_q"""
    A = np.array(a, dtype=object) % q
    k = A.shape[0]
    if A.shape != (k, k):
        raise FieldError(f"Matriz não quadrada: {A.shape}")
    augmented = np.concatenate([A, np.eye(k, dtype=object)], axis=1)
    reduced, pivots = _row_reduce(augmented, q)
    if pivots[:k] != list(range(k)):
        raise FieldError("Matriz singular sobre o corpo")
    return reduced[:, k:]
