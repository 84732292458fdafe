class Util:
    @staticmethod
    def static_func():
        pass

    @classmethod
    def class_func(cls):
        cls.static_func()

Util.class_func()
Util().static_func()
