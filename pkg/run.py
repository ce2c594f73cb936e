#!/usr/bin/env python3
"""
Path Competition Simulator - Main Entry Point

Runs either the command line interface or the web server.
"""

import sys
import os
import argparse

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), 'backend'))


def main():
    """Main entry point with options to run CLI or web server."""
    parser = argparse.ArgumentParser(
        description="Path Competition Simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run.py cli verify --suite homogeneous --count 50      # Run a verification suite
  python run.py cli solve --solver two-path --config m.json   # Solve a model
  python run.py cli experiment --config plan.json --out out/  # Run an experiment plan
  python run.py web                                            # Run web server
        """
    )

    parser.add_argument(
        'mode',
        choices=['cli', 'web'],
        help='Run mode: cli (command line) or web (Flask server)'
    )

    parser.add_argument(
        'args',
        nargs=argparse.REMAINDER,
        help='Arguments passed to the command line interface (CLI mode only)'
    )

    args = parser.parse_args()

    if args.mode == 'cli':
        from main import cli
        sys.exit(cli(args.args))

    elif args.mode == 'web':
        from api.app import app
        from config.config import config
        from utils.utils import configure_logging
        configure_logging(config.log_level, config.log_file)
        print("Starting Path Competition Simulator Web Interface...")
        print(f"Backend:  http://localhost:{config.port}")
        app.run(debug=False, host='0.0.0.0', port=config.port)


if __name__ == "__main__":
    main()
