from wahbakit.presentation.cli.main import build_parser, main
