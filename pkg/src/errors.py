"""アプリケーション例外定義。

CLIの終了コードは例外の系統で決まる:
    ValidationError → 1, NumericalError → 2, ParseError (およびI/Oエラー) → 3
"""

from typing import Any


class RDNetworkError(Exception):
    """反応拡散ネットワーク処理に関するアプリケーション例外の基底。"""


class ValidationError(RDNetworkError, ValueError):
    """入力が不変条件を満たさない場合の例外。"""


class DomainError(ValidationError):
    """正値であるべき濃度に0以下の成分が含まれる場合の例外。"""


class NotDetailedBalancedError(ValidationError):
    """反応速度定数が詳細釣り合い条件を満たさない場合の例外。"""


class NonManifoldError(ValidationError):
    """単体複体が境界付き多様体でない場合の例外（3枚以上の三角形が共有する辺、頂点ピンチ等）。"""


class InconsistentOrientationError(ValidationError):
    """隣接セル間で誘導向きが矛盾する場合の例外。"""


class DegenerateCellError(ValidationError):
    """測度0のセルが含まれる場合の例外。"""


class NotWellCenteredError(ValidationError):
    """外心が三角形の内部に無いセルが含まれる場合の例外。"""


class DimensionMismatchError(ValidationError):
    """行列・ベクトルの次元が整合しない場合の例外。"""


class NumericalError(RDNetworkError, RuntimeError):
    """数値計算の失敗を表す例外の基底。"""


class NoConvergenceError(NumericalError):
    """反復解法が最大反復回数内に収束しなかった場合の例外。"""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (最終残差={residual:.3e})")
        self.residual = residual


class StepSizeUnderflowError(NumericalError):
    """ステップ幅が下限 h_min を下回った場合の例外。"""

    def __init__(self, t: float, h: float, h_min: float) -> None:
        super().__init__(f"ステップ幅が下限を下回りました: t={t:.6g}, h={h:.3e} < h_min={h_min:.3e}")
        self.t = t
        self.h = h


class MaxStepsExceededError(NumericalError):
    """積分ステップ数が上限に達した場合の例外。"""


class NotConvergedError(NumericalError):
    """シミュレーションがコンセンサスに到達しなかった場合の例外。

    Attributes:
        status: 終了時の収束判定（NONUNIFORM_STEADY / RUNNING）
        report: 途中までのレポート（無い場合はNone）
    """

    def __init__(self, message: str, status: Any, report: Any = None) -> None:
        super().__init__(message)
        self.status = status
        self.report = report


class ParseError(RDNetworkError):
    """仕様ファイルの構文エラー。

    Attributes:
        path: ファイルパス
        line: 行番号（1始まり、不明な場合はNone）
        column: 列番号（1始まり、不明な場合はNone）
    """

    def __init__(self, path: str, message: str, line: int | None = None, column: int | None = None) -> None:
        position = f"{path}:{line}:{column}" if line is not None else path
        super().__init__(f"{position}: {message}")
        self.path = path
        self.line = line
        self.column = column
