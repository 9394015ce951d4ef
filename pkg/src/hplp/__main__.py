from hplp.cli import main

main()
