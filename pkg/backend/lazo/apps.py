# lazo/apps.py
"""
Django 앱 설정 모듈.

- INSTALLED_APPS 에 'lazo.apps.LazoConfig' 로 등록해서 사용.
- management command (run, validate, sweep, diagnose_symmetry) 가 이 앱에 들어 있다.
"""
import logging

from django.apps import AppConfig
from django.conf import settings

logger = logging.getLogger(__name__)


class LazoConfig(AppConfig):
    """
    0차 최적화 벤치마크 'lazo' 앱 설정.
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'lazo'
    verbose_name = 'Lazy-query zeroth-order optimization'

    def ready(self):
        """
        앱 로딩 시 한 번 호출되는 훅.

        - 어떤 기본값으로 실험이 돌아가는지 DEBUG 로그로 남긴다.
        """
        defaults = settings.LAZO
        logger.debug(
            "lazo ready: seed=%s trials=%s problems=%s",
            defaults['DEFAULT_SEED'], defaults['DEFAULT_TRIALS'], ', '.join(sorted(defaults['PROBLEMS'])),
        )
