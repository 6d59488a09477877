import math
import unittest

from solver.utils import parse_bool, parse_budget, sizes_from_probs


class TestUtils(unittest.TestCase):
    def test_budget(self):
        self.assertEqual(parse_budget(1024), 1024)
        self.assertEqual(parse_budget("1024"), 1024)
        self.assertEqual(parse_budget("1024 "), 1024)
        self.assertEqual(parse_budget("2^24"), 2 ** 24)
        self.assertEqual(parse_budget("2 ^ 10"), 1024)
        self.assertEqual(parse_budget("16M"), 16_000_000)
        self.assertEqual(parse_budget("1.5K"), 1500)
        self.assertEqual(parse_budget("1e6"), 1_000_000)
        self.assertEqual(parse_budget("1_000"), 1000)

        with self.assertRaises(ValueError):
            parse_budget("1.5Z")
        with self.assertRaises(ValueError):
            parse_budget("lots")
        with self.assertRaises(ValueError):
            parse_budget("1e-3")

    def test_bool(self):
        self.assertTrue(parse_bool('yes'))
        self.assertTrue(parse_bool(True))
        self.assertFalse(parse_bool('off'))
        self.assertFalse(parse_bool(0))
        with self.assertRaises(ValueError):
            parse_bool('maybe')

    def test_sizes(self):
        self.assertEqual(sizes_from_probs([0.5, 1.0, 0.25]), [2.0, 1.0, 4.0])
        self.assertTrue(math.isinf(sizes_from_probs([0.0])[0]))


if __name__ == '__main__':
    unittest.main()
