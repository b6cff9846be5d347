# lazo/exceptions.py
"""
lazo 앱 전역에서 사용하는 예외 클래스 모음.

- 모든 예외는 LazoError 를 상속한다.
- management command 에서는 InvalidConfig 를 설정 오류(exit 1),
  나머지 LazoError 를 실행 오류(exit 2)로 변환한다.
"""


class LazoError(Exception):
    """lazo 라이브러리의 최상위 예외."""


class InvalidDimension(LazoError):
    """차원 값이 잘못된 경우 (d = 0, k > d 등)."""


class InvalidInput(LazoError):
    """질의 지점의 차원이 맞지 않거나 NaN/Inf 가 섞인 경우."""


class InvalidConfig(LazoError):
    """설정 파일/설정 값이 잘못된 경우."""


class SequencingError(LazoError):
    """라운드 순서가 어긋났거나 bootstrap 없이 lazy step 을 호출한 경우."""


class UnsupportedOperation(LazoError):
    """oracle/문제가 지원하지 않는 연산 (예: LQR 의 true_gradient)."""


class DegenerateInput(LazoError):
    """두 질의 지점이 겹쳐서 부등식이 의미를 잃는 경우."""


class TraceIntegrityError(LazoError):
    """replay 로 다시 계산한 손실 시퀀스가 기록과 다를 때 (seed 불일치)."""


class InsufficientTrace(LazoError):
    """검증에 필요한 필드가 trajectory 에 기록되어 있지 않을 때."""


class RoundError(LazoError):
    """
    run() 도중 oracle/estimator 에서 난 오류를 라운드 번호와 함께 감싼다.
    """

    def __init__(self, round_index: int, cause: Exception):
        self.round_index = round_index
        self.cause = cause
        super().__init__(f"round {round_index}: {cause}")
