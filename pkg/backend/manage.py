#!/usr/bin/env python
"""
lazo-bench 명령행 진입점 (Django manage.py)

  예:
    python manage.py run --config configs/lqr.json --out out/lqr
    python manage.py validate --config configs/regression.json
    python manage.py sweep --config configs/resource_allocation.json --threshold 1 10 100
    python manage.py diagnose-symmetry --config configs/lqr.json --rounds 10

  종료 코드: 0 성공, 1 설정 오류, 2 실행 중 오류
"""

import os
import sys

# 하이픈 표기 명령 이름 → management command 모듈 이름
COMMAND_ALIASES = {
    'diagnose-symmetry': 'diagnose_symmetry',
}


def main(argv=None):
    """
    Django 관리 커맨드 실행 함수.

    1) DJANGO_SETTINGS_MODULE 환경변수를 'config.settings'로 설정하고
    2) 하이픈 별칭을 실제 명령 이름으로 바꾼 뒤
    3) django.core.management.execute_from_command_line()에 넘긴다.

    CommandError 는 Django 가 stderr 에 메시지를 쓰고 returncode 로 종료한다.
    """
    # settings 모듈 기본값 설정
    # (OS 환경변수에서 이미 지정해줬으면 그 값을 사용)
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    # Django가 설치되어 있지 않거나, 가상환경 문제일 경우 여기로 떨어진다.
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Make sure it's installed and available on your PYTHONPATH."
        ) from exc

    argv = list(sys.argv if argv is None else argv)
    if len(argv) > 1:
        argv[1] = COMMAND_ALIASES.get(argv[1], argv[1])
    execute_from_command_line(argv)
    return 0


if __name__ == '__main__':
    # 이 파일을 스크립트로 직접 실행했을 때만 main()을 호출
    sys.exit(main())
