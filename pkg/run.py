#!/usr/bin/env python3
"""
Open XXZ chain toolkit - constrained non-diagonal boundaries
Command-line entry point: verify, bethe, matel, thermo, spectrum
"""

import argparse
import json
import logging
import os
import sys

from config import Config, load_run_config, parse_complex
from errors import ConfigError, XXZError


def check_requirements():
    """Check if all required packages are installed"""
    try:
        import numpy
        import scipy
        import mpmath
        from dotenv import load_dotenv
        return True
    except ImportError as e:
        print(f"❌ Missing required package: {e}")
        print("Please run: pip install -r requirements.txt")
        return False


def check_env_file():
    """Create a .env template with the numerical defaults when none exists"""
    if not os.path.exists('.env'):
        print("⚠️  .env file not found. Creating template with the defaults...", file=sys.stderr)
        with open('.env', 'w') as f:
            f.write(f"XXZ_TOL={Config.TOL}\n")
            f.write(f"XXZ_QUAD_NODES={Config.QUAD_NODES}\n")
            f.write(f"XXZ_THREADS={Config.THREADS}\n")
            f.write(f"XXZ_LOG_LEVEL={Config.LOG_LEVEL}\n")
        return False
    return True


def load_seed_roots(path):
    """
    Seed roots from a JSON list of [re, im] pairs, or from the first solution
    of an earlier bethe result file
    """
    from results import ResultStore

    try:
        data = ResultStore().load(path)
    except json.JSONDecodeError as e:
        raise ConfigError(f"seed-roots file is not valid JSON: {e}")
    if data is None:
        raise ConfigError(f"seed-roots file not found: {path}")
    if isinstance(data, dict):
        solutions = data.get('solutions') or []
        if not solutions or not isinstance(solutions[0], dict) or 'roots' not in solutions[0]:
            raise ConfigError("seed-roots result file holds no Bethe solution")
        data = solutions[0]['roots']
    if not isinstance(data, list):
        raise ConfigError("seed-roots file must hold a list of [re, im] pairs")
    return [parse_complex(v, f'seed_roots[{i}]') for i, v in enumerate(data)]


def build_parser():
    parser = argparse.ArgumentParser(description="Open XXZ chain with constrained non-diagonal boundaries")
    parser.add_argument('command', choices=['verify', 'bethe', 'matel', 'thermo', 'spectrum'])
    parser.add_argument('--config', required=True, help="JSON run configuration")
    parser.add_argument('--out', help="result file (defaults to the config's 'out' entry)")
    parser.add_argument('--format', choices=['json', 'csv'], default='json')
    parser.add_argument('--threads', type=int)
    parser.add_argument('--tol', type=float)
    parser.add_argument('--seed-roots', help="JSON list of [re, im] seed roots for bethe/matel")
    return parser


def run(argv=None):
    """Parse arguments, execute one command, and return its exit code"""
    from app import COMMANDS
    from results import ResultStore

    args = build_parser().parse_args(argv)
    Config.override(tol=args.tol, threads=args.threads)

    try:
        cfg = load_run_config(args.config)
        kwargs = {}
        if args.seed_roots:
            if args.command not in ('bethe', 'matel'):
                raise ConfigError("--seed-roots applies to the bethe and matel commands only")
            kwargs['seed_roots'] = load_seed_roots(args.seed_roots)
    except XXZError as e:
        print(f"❌ {e.message}", file=sys.stderr)
        print(json.dumps(e.to_dict(), sort_keys=True))
        return e.exit_code

    result = COMMANDS[args.command](cfg, **kwargs)
    rows = result.pop('rows', None)
    store = ResultStore(args.out or cfg.out, args.format)
    path = store.save(result, rows)
    if path is None:
        sys.stdout.write(store.render_json(result))

    exit_code = int(result.get('exit_code', 0))
    if result.get('status') == 'success':
        print(f"✅ {args.command} finished" + (f", results in {path}" if path else ""), file=sys.stderr)
    else:
        print(f"❌ {args.command}: {result.get('message')}", file=sys.stderr)
    return exit_code


def main():
    """Main entry point"""
    if not check_requirements():
        sys.exit(1)
    check_env_file()
    logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
                        format='%(asctime)s %(name)s %(levelname)s %(message)s', stream=sys.stderr)
    sys.exit(run())


if __name__ == '__main__':
    main()
