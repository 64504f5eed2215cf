# Core computation package
