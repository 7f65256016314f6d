from recovering_bandits.cli import main

raise SystemExit(main())
