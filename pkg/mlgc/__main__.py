from mlgc.main import main

main()
