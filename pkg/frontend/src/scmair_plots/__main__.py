from .cli import main

main(prog_name="scmair-render")
