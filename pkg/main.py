from orlicz_maxima.app import main


if __name__ == "__main__":
    main()
