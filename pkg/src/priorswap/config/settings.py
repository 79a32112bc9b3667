"""애플리케이션 설정 로더."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    """환경 변수 기반 프로젝트 설정. 실험 설정 파일에 값이 없을 때의 기본값으로 쓰인다."""

    model_config = SettingsConfigDict(
        env_prefix="PRIORSWAP_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    output_dir: Path = Field(
        default=Path("./runs"),
        description="CSV 산출물과 실행 기록을 저장할 기본 디렉터리",
    )
    database_url: Optional[str] = Field(
        default=None,
        description="실행 기록용 SQLAlchemy URL (없으면 출력 디렉터리의 runs.db)",
    )
    log_level: str = Field(
        default="INFO",
        description="루트 로거 레벨",
    )
    worker_slots: int = Field(
        default=1,
        description="한 실험 안에서 동시에 실행할 방법 수",
        ge=1,
    )
    burn_in_fraction: float = Field(
        default=0.25,
        description="체인 앞부분에서 버릴 비율",
        ge=0.0,
        lt=1.0,
    )
    bandwidth_constant: float = Field(
        default=1.0,
        description="semiparametric bandwidth 상수 c_b",
        gt=0.0,
    )
    default_k: int = Field(
        default=10,
        description="의사 데이터 점 개수 k 의 상한 (실제 k = min(k, T_f))",
        ge=1,
    )
    fit_restarts: int = Field(
        default=5,
        description="score matching 다중 재시작 횟수",
        ge=1,
    )
    mh_pilot_steps: int = Field(
        default=1_000,
        description="MH 제안 표준편차를 정하는 파일럿 체인 길이",
        ge=10,
    )
    hmc_warmup_steps: int = Field(
        default=500,
        description="HMC step size 조정 워밍업 길이",
        ge=0,
    )
    hmc_target_acceptance_low: float = Field(
        default=0.6,
        description="HMC 워밍업 목표 수락률 하한",
        gt=0.0,
        lt=1.0,
    )
    hmc_target_acceptance_high: float = Field(
        default=0.9,
        description="HMC 워밍업 목표 수락률 상한",
        gt=0.0,
        le=1.0,
    )
    ground_truth_steps: int = Field(
        default=1_000_000,
        description="긴 체인 기준값의 체인 길이",
        ge=1,
    )
    quadrature_tolerance: float = Field(
        default=1e-6,
        description="구적 세분 종료 상대 허용오차",
        gt=0.0,
    )
    checkpoint_start_ms: float = Field(
        default=10.0,
        description="wall 체크포인트의 첫 시점(ms), 이후 두 배씩",
        gt=0.0,
    )
    checkpoint_start_samples: int = Field(
        default=64,
        description="samples 체크포인트의 첫 샘플 수, 이후 두 배씩",
        ge=1,
    )
    likelihood_chunk_size: int = Field(
        default=4_000_000,
        description="가능도 배치 평가 한 덩어리의 최대 원소 수 (T×n×d)",
        ge=1_000,
    )

    def resolved_database_url(self, output_dir: Optional[Path] = None) -> str:
        if self.database_url:
            return self.database_url
        base = Path(output_dir or self.output_dir)
        return f"sqlite+aiosqlite:///{(base / 'runs.db').as_posix()}"


@lru_cache(maxsize=1)
def get_settings() -> AppSettings:
    """싱글턴 형태로 설정을 반환한다."""

    return AppSettings()


__all__ = ["AppSettings", "get_settings"]
