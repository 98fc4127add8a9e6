"""保存モエティ（ker Sᵀ の厳密有理基底）の計算。"""

from functools import reduce
from math import gcd, lcm

import numpy as np
import sympy
from numpy.typing import ArrayLike, NDArray


def _primitive_integer_vector(vector: sympy.Matrix) -> list[int]:
    """有理ベクトルを、最初の非零成分が正となる原始整数ベクトルに変換する。"""
    entries = [sympy.Rational(v) for v in vector]
    scale = reduce(lcm, (int(e.q) for e in entries), 1)
    ints = [int(e * scale) for e in entries]
    divisor = reduce(gcd, (abs(i) for i in ints), 0) or 1
    ints = [i // divisor for i in ints]
    first = next((i for i in ints if i != 0), 0)
    return [-i for i in ints] if first < 0 else ints


def conserved_moieties(S: ArrayLike) -> NDArray[np.int64]:
    """化学量論行列 S (m×r) の左零空間 ker(Sᵀ) の基底を返す。

    有理数演算（sympy）で零空間を求め、各基底ベクトルを原始整数ベクトルに
    正規化するため wᵀS = 0 が厳密に成立する。順序は自由変数の列順で決定的。

    Args:
        S: 整数の化学量論行列

    Returns:
        基底を行に並べた (k, m) 整数配列。Sᵀ が列フルランクなら (0, m)。
    """
    S_int = np.asarray(S, dtype=np.int64)
    if S_int.ndim != 2:
        raise ValueError(f"S は2次元配列である必要があります: ndim={S_int.ndim}")
    m, r = S_int.shape
    if r == 0:
        return np.eye(m, dtype=np.int64)

    St = sympy.Matrix(S_int.T.tolist())
    basis = [_primitive_integer_vector(v) for v in St.nullspace()]
    if not basis:
        return np.zeros((0, m), dtype=np.int64)
    return np.array(basis, dtype=np.int64)


def format_moiety(w: ArrayLike) -> str:
    """モエティベクトルのラベル（例: "(1,1)"）を返す。"""
    return "(" + ",".join(str(int(v)) for v in np.asarray(w).reshape(-1)) + ")"
