from ragforge.cli.main import app

app()
