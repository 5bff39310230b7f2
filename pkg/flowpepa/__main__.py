from flowpepa.cli import main

raise SystemExit(main())
