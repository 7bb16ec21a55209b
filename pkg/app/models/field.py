# app/models/field.py
import logging
from dataclasses import dataclass
from typing import Iterable, List, Literal, Sequence, Union

import numpy as np

from app.exceptions import FieldError

logger = logging.getLogger(__name__)

# Bases determinísticas de Miller-Rabin, exatas para n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Acima deste módulo as somas de produtos podem estourar int64
_INT64_SAFE_MODULUS = 2**20
MAX_MODULUS = 2**63 - 1

ArithOp = Literal["add", "sub", "mul", "div", "neg", "inv"]


def is_prime(n: int) -> bool:
    """Teste de primalidade Miller-Rabin determinístico para inteiros de 64 bits"""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Field:
    """Corpo primo F_q, com q primo e q >= 3"""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise FieldError(f"Módulo deve ser inteiro, recebido {self.q!r}")
        if self.q < 3:
            raise FieldError(f"O corpo precisa de pelo menos três elementos (q={self.q})")
        if self.q > MAX_MODULUS:
            raise FieldError(f"Módulo {self.q} excede 63 bits")
        if not is_prime(int(self.q)):
            raise FieldError(f"Módulo {self.q} não é primo")
        object.__setattr__(self, "q", int(self.q))

    @property
    def dtype(self):
        return np.int64 if self.q <= _INT64_SAFE_MODULUS else object

    # Elementos escalares

    def element(self, value: int) -> "FieldElement":
        return FieldElement(int(value) % self.q, self)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise FieldError("Inverso de zero não existe")
        return pow(a, self.q - 2, self.q)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def nonzero_elements(self) -> List[int]:
        return list(range(1, self.q))

    def h_values(self) -> List[int]:
        """Os valores admissíveis de h, isto é F_q \\ {0, 1}"""
        return list(range(2, self.q))

    # Vetores e matrizes (numpy)

    def array(self, values: Union[Iterable, np.ndarray]) -> np.ndarray:
        arr = np.array(values, dtype=object)
        arr = arr % self.q
        return arr.astype(self.dtype)

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64).astype(self.dtype)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (np.asarray(a).astype(self.dtype) @ np.asarray(b).astype(self.dtype)) % self.q

    def scale(self, vector: np.ndarray, scalar: int) -> np.ndarray:
        return (np.asarray(vector).astype(self.dtype) * (int(scalar) % self.q)) % self.q

    # Amostragem

    def _integers(self, rng: np.random.Generator, low: int, size=None):
        values = rng.integers(low, self.q, size=size, dtype=np.int64)
        if size is None:
            return int(values)
        return values.astype(self.dtype)

    def random_vector(self, rng: np.random.Generator, size) -> np.ndarray:
        return self._integers(rng, 0, size)

    def random_nonzero_vector(self, rng: np.random.Generator, size) -> np.ndarray:
        return self._integers(rng, 1, size)

    def sample_nonzero(self, rng: np.random.Generator) -> "FieldElement":
        return self.element(self._integers(rng, 1))

    def sample_h(self, rng: np.random.Generator) -> "FieldElement":
        return self.element(self._integers(rng, 2))

    def __str__(self) -> str:
        return f"F_{self.q}"


@dataclass(frozen=True)
class FieldElement:
    """Elemento de F_q armazenado como resíduo canônico"""

    value: int
    field: Field

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise FieldError(f"Valor {self.value} fora de [0, {self.field.q})")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field.q != self.field.q:
                raise FieldError(f"Operandos em corpos distintos: {self.field} e {other.field}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.q
        return NotImplemented

    def __add__(self, other):
        return self.field.element(self.field.add(self.value, self._coerce(other)))

    def __sub__(self, other):
        return self.field.element(self.field.sub(self.value, self._coerce(other)))

    def __mul__(self, other):
        return self.field.element(self.field.mul(self.value, self._coerce(other)))

    def __truediv__(self, other):
        return self.field.element(self.field.div(self.value, self._coerce(other)))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self.field.element(self.field.neg(self.value))

    def inverse(self) -> "FieldElement":
        return self.field.element(self.field.inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.q})"


def make_field(q: int) -> Field:
    """
    Cria o corpo primo F_q

    Args:
        q: Módulo primo, q >= 3

    Returns:
        Field: Corpo pronto para a aritmética dos protocolos
    """
    field = Field(q)
    logger.debug(f"Corpo {field} criado (dtype={field.dtype})")
    return field


def arith(a: FieldElement, b: FieldElement, op: ArithOp) -> FieldElement:
    """Aritmética modular entre dois elementos do mesmo corpo (b é ignorado em neg/inv)"""
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    if a.field.q != b.field.q:
        raise FieldError(f"Operandos em corpos distintos: {a.field} e {b.field}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise FieldError(f"Operação desconhecida: {op}")


def as_ints(values: Sequence) -> List[int]:
    return [int(v) for v in values]
