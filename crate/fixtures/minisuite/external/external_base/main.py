import unittest

class MyTest(unittest.TestCase):
    def test(self):
        self.assertTrue(True)

MyTest().test()
