from plastic_lab.app.main import run


if __name__ == "__main__":
    run()
