# run.py
"""
Lanzador de la línea de órdenes rgd desde la raíz del repositorio.
"""

if __name__ == "__main__":
    from rgd_app.cli import main
    main()
