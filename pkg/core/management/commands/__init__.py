# commands package
