# ==============================================================================
# app.py - QPDE 시뮬레이터 명령행 진입점
# ==============================================================================
# 사용 예:
#   python qpde_Sim/app.py spectrum --manifest qpde_Sim/data/manifest_h2_2orb.json
#   python qpde_Sim/app.py qpde --manifest ... --path compiled --out results/
#   python qpde_Sim/app.py aem --manifest ... --workers 3
#
# 종료 코드: 0 성공, 2 입력 오류, 3 수치 가드 오류, 4 위상 모호 구간
# ==============================================================================
import argparse
import functools
import logging
import sys

from commands import aem_cmd, bpde_scan_cmd, qpde_cmd, spectrum_cmd, sweep_cmd
from data_manager import PATH_ALIASES, load_manifest
from utils import EXIT_CODES, exit_code_for

# --- 1. 명령 설정 ---
COMMANDS = [
    {"name": "spectrum", "help": "정확 대각화 기준 스펙트럼과 간격", "run_func": spectrum_cmd.run},
    {"name": "qpde", "help": "QPDE 회로로 에너지 간격 계산", "run_func": functools.partial(qpde_cmd.run, mode="qpde")},
    {"name": "qpe", "help": "QPE 회로로 총 에너지 계산", "run_func": functools.partial(qpde_cmd.run, mode="qpe")},
    {
        "name": "qpde-naive",
        "help": "controlled-Ex 를 쓰는 단순 QPDE (대조군)",
        "run_func": functools.partial(qpde_cmd.run, mode="qpde-naive"),
    },
    {"name": "bpde-scan", "help": "단일 보조 큐비트 Prob(0) 스캔", "run_func": bpde_scan_cmd.run},
    {"name": "aem", "help": "dt 별 간격의 Δt² 외삽", "run_func": aem_cmd.run},
    {"name": "sweep", "help": "구조 목록에 대한 QPDE/AEM 표", "run_func": sweep_cmd.run},
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpde-sim", description="QPDE 에너지 간격 시뮬레이터")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command["name"], help=command["help"])
        sub.add_argument("--manifest", required=True, help="실행 manifest JSON 경로")
        sub.add_argument("--path", choices=sorted(PATH_ALIASES), help="시간 전개 경로 (manifest 값 덮어쓰기)")
        sub.add_argument("--single-shot", action="store_true", help="seed 로 측정 결과 하나를 뽑아 해석")
        sub.add_argument("--seed", type=int, help="난수 seed (manifest 값 덮어쓰기)")
        sub.add_argument("--peak-bin", type=int, help="AEM 에서 사용할 피크 bin")
        sub.add_argument("--out", help="결과 디렉터리 (manifest 값 덮어쓰기)")
        sub.add_argument("--workers", type=int, help="dt 별 병렬 실행 스레드 수")
        sub.add_argument("--preset", help="config.ini 의 PRESET 이름")
        sub.add_argument("--verbose", action="store_true", help="DEBUG 로그 출력")
        sub.set_defaults(run_func=command["run_func"])
    return parser


def main(argv=None) -> int:
    """메인 실행 함수. 종료 코드를 돌려줍니다."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        manifest = load_manifest(args.manifest, preset=args.preset)
        manifest = manifest.with_overrides(path=args.path, seed=args.seed, output_dir=args.out)
        args.run_func(manifest, args)
    except Exception as e:
        code = exit_code_for(e)
        print(f"오류: {e}", file=sys.stderr)
        return code
    return EXIT_CODES["ok"]


if __name__ == "__main__":
    sys.exit(main())
