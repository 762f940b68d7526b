class CythonOnly:
    pass
