# ==============================================================================
# fermion_hamiltonian.py - 분자 적분 → 전자 해밀토니안 → 큐비트 해밀토니안
# ==============================================================================
# [주요 흐름]
# 1. parse_fcidump: FCIDUMP 텍스트에서 1/2전자 적분과 core 에너지를 읽습니다.
# 2. build_fermion_hamiltonian: 2차 양자화 해밀토니안을 만듭니다.
# 3. jordan_wigner: 파울리 합(PauliSum)으로 변환합니다.
#
# [스핀 오비탈 순서 규약]
# - 스핀 오비탈 인덱스 = 2·(공간 오비탈) + (α 이면 0, β 이면 1)
# - 스핀 오비탈 p ↔ 큐비트 p. 점유 비트마스크에서 스핀 오비탈 p 는 (1 << p).
# - JWT: a_p → (X_p + iY_p)/2 ⊗ Z_{q<p}
# - 행렬식은 스핀 오비탈 오름차순으로 생성 연산자를 곱한 상태
#   (a†_{p1} a†_{p2} ... |vac⟩, p1 < p2 < ...) 가 계산 기저 상태 +1 에 대응합니다.
# ==============================================================================
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from hamiltonian.pauli_core import PauliString, PauliSum, PauliTerm, merge_terms
from utils import FcidumpParseError, NumericalGuardError, QpdeInputError, sim_setting

logger = logging.getLogger(__name__)

ALPHA, BETA = 0, 1


def spin_orbital(spatial: int, spin: int) -> int:
    return 2 * spatial + spin


# ------------------------------------------------------------------------------
# 분자 적분
# ------------------------------------------------------------------------------
@dataclass
class MolecularIntegrals:
    norb: int
    nelec: int
    ms2: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    orbsym: list = field(default_factory=list)

    def __post_init__(self):
        if self.norb < 1:
            raise QpdeInputError(f"NORB 는 1 이상이어야 합니다: {self.norb}")
        if self.one_body.shape != (self.norb, self.norb):
            raise QpdeInputError(f"1전자 적분 크기가 잘못되었습니다: {self.one_body.shape}")
        if self.two_body.shape != (self.norb,) * 4:
            raise QpdeInputError(f"2전자 적분 크기가 잘못되었습니다: {self.two_body.shape}")
        if not np.allclose(self.one_body, self.one_body.T, atol=1e-12):
            raise QpdeInputError("1전자 적분 h_pq 가 대칭이 아닙니다.")
        g = self.two_body
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=1e-12):
                raise QpdeInputError("2전자 적분 (pq|rs) 가 8중 대칭을 만족하지 않습니다.")

    @property
    def n_modes(self) -> int:
        return 2 * self.norb


def _set_two_body(g: np.ndarray, i: int, j: int, k: int, l: int, value: float) -> None:
    for a, b, c, d in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                       (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)):
        g[a, b, c, d] = value


_HEADER_PAIR = re.compile(r"([A-Za-z_]\w*)\s*=\s*([-+\d.,\s]*)")


def _parse_header(body: str, end_line: int) -> dict:
    values = {}
    for key, raw in _HEADER_PAIR.findall(body):
        items = [x for x in raw.replace(" ", ",").split(",") if x.strip()]
        try:
            values[key.upper()] = [int(x) for x in items]
        except ValueError:
            raise FcidumpParseError(f"헤더 값이 정수가 아닙니다: {key}={raw.strip()}", end_line)
    for key in ("NORB", "NELEC"):
        if not values.get(key):
            raise FcidumpParseError(f"헤더에 {key} 가 없습니다.", end_line)
    return values


def parse_fcidump(text: str) -> MolecularIntegrals:
    """
    FCIDUMP 텍스트를 읽어 MolecularIntegrals 를 만듭니다.

    인덱스는 1부터 시작하며,
    - i j k l 모두 0 이 아니면 (ij|kl)
    - k = l = 0 이면 h_ij
    - 모두 0 이면 core 에너지
    - i 0 0 0 (오비탈 에너지) 줄은 무시합니다.
    """
    lines = text.splitlines()
    if not lines or "&FCI" not in lines[0].upper():
        raise FcidumpParseError("FCIDUMP 헤더(&FCI)로 시작하지 않습니다.", 1)

    header_parts = []
    end_index = None
    for n, line in enumerate(lines):
        upper = line.upper()
        header_parts.append(line)
        if "&END" in upper or line.strip() == "/":
            end_index = n
            break
    if end_index is None:
        raise FcidumpParseError("헤더 종료 표시(&END 또는 /)를 찾을 수 없습니다.", len(lines))

    body = " ".join(header_parts)
    body = re.sub(r"&FCI|&END", " ", body, flags=re.IGNORECASE).replace("/", " ")
    header = _parse_header(body, end_index + 1)

    norb = header["NORB"][0]
    nelec = header["NELEC"][0]
    ms2 = header.get("MS2", [0])[0]
    orbsym = header.get("ORBSYM", [])

    h = np.zeros((norb, norb))
    g = np.zeros((norb,) * 4)
    core = 0.0

    for n in range(end_index + 1, len(lines)):
        line_number = n + 1
        parts = lines[n].split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpParseError(f"'값 i j k l' 형식이 아닙니다: {lines[n].strip()}", line_number)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
        except ValueError:
            raise FcidumpParseError(f"숫자가 아닌 값입니다: {parts[0]}", line_number)
        try:
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FcidumpParseError(f"정수가 아닌 인덱스입니다: {' '.join(parts[1:])}", line_number)
        if any(x < 0 or x > norb for x in (i, j, k, l)):
            raise FcidumpParseError(f"인덱스 범위(0..{norb})를 벗어났습니다: {i} {j} {k} {l}", line_number)

        if i and j and k and l:
            _set_two_body(g, i - 1, j - 1, k - 1, l - 1, value)
        elif i and j and not k and not l:
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        elif not (i or j or k or l):
            core = value
        elif i and not (j or k or l):
            logger.debug("오비탈 에너지 줄 무시 (%d번째 줄)", line_number)
        else:
            raise FcidumpParseError(f"해석할 수 없는 인덱스 조합입니다: {i} {j} {k} {l}", line_number)

    logger.info("FCIDUMP 로드: NORB=%d, NELEC=%d, MS2=%d", norb, nelec, ms2)
    return MolecularIntegrals(norb, nelec, ms2, core, h, g, list(orbsym))


def write_fcidump(m: MolecularIntegrals, tol: float = 0.0) -> str:
    """8중 대칭의 대표 원소만 쓰는 FCIDUMP 텍스트를 만듭니다."""
    orbsym = m.orbsym or [1] * m.norb
    out = [
        f"&FCI NORB={m.norb},NELEC={m.nelec},MS2={m.ms2},",
        " ORBSYM=" + ",".join(str(x) for x in orbsym) + ",",
        " ISYM=1,",
        "&END",
    ]
    n = m.norb
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    value = m.two_body[i, j, k, l]
                    if abs(value) > tol:
                        out.append(f"{float(value)!r} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            value = m.one_body[i, j]
            if abs(value) > tol:
                out.append(f"{float(value)!r} {i + 1} {j + 1} 0 0")
    out.append(f"{float(m.core_energy)!r} 0 0 0 0")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------------------
# 페르미온 연산자
# ------------------------------------------------------------------------------
@dataclass
class FermionOperator:
    """
    사다리 연산자 문자열의 가중합.

    terms 의 키는 ((모드, 1=생성/0=소멸), ...) 튜플이고 빈 튜플 () 은 상수항입니다.
    """

    n_modes: int
    terms: dict = field(default_factory=dict)

    def add_term(self, ops: tuple, coefficient) -> None:
        if coefficient == 0:
            return
        self.terms[ops] = self.terms.get(ops, 0.0) + coefficient

    @property
    def constant(self):
        return self.terms.get((), 0.0)

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        out = FermionOperator(max(self.n_modes, other.n_modes), dict(self.terms))
        for ops, c in other.terms.items():
            out.add_term(ops, c)
        return out

    def __mul__(self, other):
        if not isinstance(other, FermionOperator):
            return FermionOperator(self.n_modes, {ops: c * other for ops, c in self.terms.items()})
        out = FermionOperator(max(self.n_modes, other.n_modes))
        for ops_a, ca in self.terms.items():
            for ops_b, cb in other.terms.items():
                out.add_term(ops_a + ops_b, ca * cb)
        return out

    __rmul__ = __mul__


def build_fermion_hamiltonian(m: MolecularIntegrals) -> FermionOperator:
    """
    H = E_core + Σ_{pq,σ} h_pq a†_{pσ} a_{qσ}
        + ½ Σ_{pqrs,στ} (pq|rs) a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}
    """
    op = FermionOperator(m.n_modes)
    op.add_term((), m.core_energy)

    for p, q in zip(*np.nonzero(m.one_body)):
        for spin in (ALPHA, BETA):
            op.add_term(((spin_orbital(p, spin), 1), (spin_orbital(q, spin), 0)), float(m.one_body[p, q]))

    for p, q, r, s in zip(*np.nonzero(m.two_body)):
        value = 0.5 * float(m.two_body[p, q, r, s])
        for sigma in (ALPHA, BETA):
            for tau in (ALPHA, BETA):
                P, Q = spin_orbital(p, sigma), spin_orbital(q, sigma)
                R, S = spin_orbital(r, tau), spin_orbital(s, tau)
                if P == R or Q == S:
                    continue
                op.add_term(((P, 1), (R, 1), (S, 0), (Q, 0)), value)
    logger.debug("페르미온 해밀토니안: %d개 항", len(op.terms))
    return op


def number_operator(n_modes: int, modes=None) -> FermionOperator:
    op = FermionOperator(n_modes)
    for p in range(n_modes) if modes is None else modes:
        op.add_term(((p, 1), (p, 0)), 1.0)
    return op


def spin_operators(norb: int) -> tuple:
    """(N, S_z, S²) 를 FermionOperator 로 돌려줍니다."""
    n_modes = 2 * norb
    n_op = number_operator(n_modes)
    sz = FermionOperator(n_modes)
    s_plus = FermionOperator(n_modes)
    s_minus = FermionOperator(n_modes)
    for k in range(norb):
        a, b = spin_orbital(k, ALPHA), spin_orbital(k, BETA)
        sz.add_term(((a, 1), (a, 0)), 0.5)
        sz.add_term(((b, 1), (b, 0)), -0.5)
        s_plus.add_term(((a, 1), (b, 0)), 1.0)
        s_minus.add_term(((b, 1), (a, 0)), 1.0)
    s_squared = s_minus * s_plus + sz + sz * sz
    return n_op, sz, s_squared


# ------------------------------------------------------------------------------
# Jordan–Wigner 변환
# ------------------------------------------------------------------------------
# 파울리 연산자를 (x, z) 비트마스크로 표현: σ(x,z) = i^{x·z} X^x Z^z (큐비트별)
# 내부 마스크에서는 큐비트 q ↔ (1 << q).

def _pauli_product(x1: int, z1: int, x2: int, z2: int) -> tuple:
    x, z = x1 ^ x2, z1 ^ z2
    power = (
        (x1 & z1).bit_count() + (x2 & z2).bit_count()
        + 2 * (z1 & x2).bit_count() - (x & z).bit_count()
    ) % 4
    return x, z, 1j ** power


def _ladder(p: int, dagger: int) -> list:
    low = (1 << p) - 1
    bit = 1 << p
    y_sign = -0.5j if dagger else 0.5j
    return [(bit, low, 0.5), (bit, low | bit, y_sign)]


def _axes_from_masks(x: int, z: int, n: int) -> str:
    letters = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
    return "".join(letters[((x >> q) & 1, (z >> q) & 1)] for q in range(n))


def jordan_wigner(f: FermionOperator, n_modes: int | None = None) -> PauliSum:
    """
    페르미온 연산자를 JWT 로 PauliSum 으로 바꿉니다.

    허수 잔여 계수가 imaginary_tolerance 를 넘으면(비에르미트 입력)
    NumericalGuardError 를 냅니다.
    """
    n = n_modes or f.n_modes
    if n > sim_setting("max_realize_qubits"):
        raise NumericalGuardError(f"JWT 모드 수 제한 초과: {n}")

    qubit_terms: dict = {}
    for ops, coefficient in f.terms.items():
        partial = {(0, 0): complex(coefficient)}
        for mode, dagger in ops:
            if mode >= n:
                raise QpdeInputError(f"모드 인덱스 {mode} 가 모드 수 {n} 를 벗어났습니다.")
            nxt: dict = {}
            for (x1, z1), c1 in partial.items():
                for x2, z2, c2 in _ladder(mode, dagger):
                    x, z, phase = _pauli_product(x1, z1, x2, z2)
                    nxt[(x, z)] = nxt.get((x, z), 0.0) + c1 * c2 * phase
            partial = nxt
        for key, c in partial.items():
            qubit_terms[key] = qubit_terms.get(key, 0.0) + c

    tolerance = sim_setting("imaginary_tolerance")
    worst = max((abs(c.imag) for c in qubit_terms.values()), default=0.0)
    if worst > tolerance:
        raise NumericalGuardError(f"JWT 결과에 허수 계수가 남았습니다 (max |Im| = {worst:.3e}). 입력이 에르미트가 아닙니다.")
    if worst > 0:
        logger.debug("JWT 허수 잔여 %.3e 제거", worst)

    raw = [PauliTerm(PauliString(_axes_from_masks(x, z, n)), float(c.real)) for (x, z), c in qubit_terms.items()]
    return merge_terms(raw, qubit_count=n)


# ------------------------------------------------------------------------------
# 점유 기저 밀집 행렬 (페르미온 오라클)
# ------------------------------------------------------------------------------
def occupation_to_index(occupation: int, n_modes: int) -> int:
    index = 0
    for p in range(n_modes):
        if (occupation >> p) & 1:
            index |= 1 << (n_modes - 1 - p)
    return index


def apply_ladder_string(ops: tuple, occupation: int) -> tuple:
    """
    ops 를 오른쪽부터 점유 상태에 적용합니다. (부호, 새 점유) 또는 (0, None).

    a†_p, a_p 의 부호는 (-1)^{p 보다 작은 점유 모드 수}.
    """
    sign = 1
    for mode, dagger in reversed(ops):
        bit = 1 << mode
        occupied = bool(occupation & bit)
        if dagger == occupied:
            return 0, None
        if (occupation & (bit - 1)).bit_count() % 2:
            sign = -sign
        occupation ^= bit
    return sign, occupation


def fermion_dense_matrix(f: FermionOperator, n_modes: int | None = None) -> np.ndarray:
    """점유 기저에서 직접 부호를 따져 만든 밀집 행렬 (JWT 검증용 오라클)."""
    n = n_modes or f.n_modes
    if n > sim_setting("max_realize_qubits"):
        raise NumericalGuardError(f"밀집 행렬 크기 제한 초과: {n} 모드")
    dim = 1 << n
    matrix = np.zeros((dim, dim), dtype=complex)
    index_of = [occupation_to_index(occ, n) for occ in range(dim)]
    for ops, coefficient in f.terms.items():
        for occ in range(dim):
            sign, result = apply_ladder_string(ops, occ)
            if sign:
                matrix[index_of[result], index_of[occ]] += sign * coefficient
    return matrix


def sector_indices(n_modes: int, n_electrons: int | None = None, sz: float | None = None) -> np.ndarray:
    """입자 수 / S_z 섹터에 속하는 계산 기저 인덱스들."""
    picked = []
    alpha_mask = sum(1 << p for p in range(0, n_modes, 2))
    for occ in range(1 << n_modes):
        if n_electrons is not None and occ.bit_count() != n_electrons:
            continue
        if sz is not None:
            n_alpha = (occ & alpha_mask).bit_count()
            n_beta = occ.bit_count() - n_alpha
            if abs(0.5 * (n_alpha - n_beta) - sz) > 1e-9:
                continue
        picked.append(occupation_to_index(occ, n_modes))
    return np.array(sorted(picked), dtype=np.int64)


# ------------------------------------------------------------------------------
# 행렬식 표기
# ------------------------------------------------------------------------------
_NOTATION_BITS = {"0": (), "2": (ALPHA, BETA), "a": (ALPHA,), "b": (BETA,), "α": (ALPHA,), "β": (BETA,)}


@dataclass(frozen=True)
class DeterminantSpec:
    """스핀 오비탈 점유 비트마스크 (스핀 오비탈 p ↔ 1 << p)."""

    bits: int
    n_modes: int

    @property
    def occupied(self) -> list:
        return [p for p in range(self.n_modes) if (self.bits >> p) & 1]

    @property
    def n_electrons(self) -> int:
        return self.bits.bit_count()

    @property
    def sz(self) -> float:
        n_alpha = sum(1 for p in self.occupied if p % 2 == ALPHA)
        return 0.5 * (n_alpha - (self.n_electrons - n_alpha))

    def basis_index(self) -> int:
        return occupation_to_index(self.bits, self.n_modes)

    def bitstring(self) -> str:
        return "".join("1" if (self.bits >> p) & 1 else "0" for p in range(self.n_modes))

    def notation(self) -> str:
        chars = []
        for k in range(self.n_modes // 2):
            a = (self.bits >> (2 * k)) & 1
            b = (self.bits >> (2 * k + 1)) & 1
            chars.append({(0, 0): "0", (1, 1): "2", (1, 0): "a", (0, 1): "b"}[(a, b)])
        return "".join(chars)

    @classmethod
    def from_bitstring(cls, text: str) -> "DeterminantSpec":
        if not text or set(text) - {"0", "1"}:
            raise QpdeInputError(f"점유 비트열은 0/1 로만 이루어져야 합니다: {text!r}")
        return cls(sum(1 << p for p, c in enumerate(text) if c == "1"), len(text))


def determinant_from_notation(s: str, norb: int | None = None, n_electrons: int | None = None) -> DeterminantSpec:
    """
    "2000", "aa00" 같은 공간 오비탈 표기를 비트마스크로 바꿉니다.

    '2' 이중 점유, 'a' α 단일 점유, 'b' β 단일 점유, '0' 비어 있음.
    """
    if norb is not None and len(s) != norb:
        raise QpdeInputError(f"행렬식 표기 길이 {len(s)} 가 NORB={norb} 와 다릅니다: {s!r}")
    bits = 0
    for k, ch in enumerate(s):
        if ch not in _NOTATION_BITS:
            raise QpdeInputError(f"행렬식 표기에 허용되지 않는 문자 {ch!r}: {s!r}")
        for spin in _NOTATION_BITS[ch]:
            bits |= 1 << spin_orbital(k, spin)
    det = DeterminantSpec(bits, 2 * len(s))
    if n_electrons is not None and det.n_electrons != n_electrons:
        raise QpdeInputError(f"전자 수가 맞지 않습니다: {s!r} → {det.n_electrons} (기대값 {n_electrons})")
    return det
