"""Fixed binary test pattern: 256 (px, py, qx, qy) offsets.

Generated by ``brief.generate_pattern(PATTERN_SEED)``; regenerate rather than edit.
"""

PATTERN = (
    (3, 2, -7, 3),
    (-3, 3, 1, -6),
    (2, -10, -4, -2),
    (11, 4, -1, -1),
    (-2, 12, 6, -12),
    (1, -6, -7, -5),
    (1, 7, -1, -7),
    (4, -4, 3, -2),
    (4, -7, 5, -3),
    (-10, 3, 2, 4),
    (-2, -1, -10, -7),
    (2, -7, -2, 1),
    (-3, 3, 1, 9),
    (-1, 6, -1, -4),
    (-9, -6, 4, -4),
    (12, -2, 1, 0),
    (-1, 2, -8, -8),
    (11, -2, 6, -6),
    (0, -5, 10, -2),
    (-4, 1, -6, 6),
    (-2, -6, 5, 11),
    (8, -3, 4, 1),
    (-1, 5, -7, -3),
    (-6, -8, 8, -2),
    (2, -6, -1, -6),
    (12, -6, 1, -2),
    (6, -8, 3, -3),
    (-5, 3, 2, -3),
    (-1, -1, -7, -6),
    (0, 6, -12, 8),
    (-3, 8, 8, 1),
    (-7, 8, 2, -6),
    (-9, 9, 4, -4),
    (5, 7, -2, 1),
    (-6, 1, -11, -10),
    (-6, -2, -6, 5),
    (4, -2, 4, -1),
    (-1, -1, 7, 7),
    (-1, 6, 7, -8),
    (13, 6, -3, 6),
    (-6, -9, 0, 7),
    (3, -9, -13, -5),
    (-1, 4, -1, 0),
    (14, 1, -3, -2),
    (-11, -5, -1, 8),
    (4, 9, 7, 4),
    (4, -6, 3, 3),
    (2, 6, -1, 0),
    (-2, -2, 12, 0),
    (1, 6, 6, 2),
    (3, 6, -4, -7),
    (5, -1, -7, -8),
    (0, 3, -7, -8),
    (-1, -2, -1, -4),
    (-5, -9, -10, 2),
    (2, 2, -3, -5),
    (-5, 4, -7, -5),
    (-1, -4, 3, 6),
    (-3, -1, -2, 7),
    (2, -5, 10, 5),
    (-2, -3, 4, -5),
    (1, -3, -11, 9),
    (0, 0, -5, -11),
    (1, 10, -11, -1),
    (1, 2, 4, 2),
    (2, -3, -5, 2),
    (-8, -4, 4, 2),
    (-3, 8, -4, -9),
    (1, 3, -2, -2),
    (9, -3, 4, 1),
    (3, 3, 4, 0),
    (-5, -6, 7, -9),
    (8, -3, 7, 4),
    (-9, 5, 0, -2),
    (-12, 4, -4, -2),
    (5, -5, -5, -8),
    (-3, 3, -6, 8),
    (1, 3, 7, 6),
    (-5, -8, -1, 3),
    (1, -5, -11, 7),
    (4, 6, -3, 1),
    (3, -13, 0, 2),
    (-6, 5, 1, 0),
    (7, -3, 11, 5),
    (1, -9, -1, 8),
    (10, 11, -6, 11),
    (6, 1, -4, -3),
    (7, -13, 2, -1),
    (-1, -2, -1, 3),
    (-3, -5, 1, 0),
    (0, 1, -1, -3),
    (4, -3, -5, 9),
    (-7, 6, -4, -9),
    (-8, 1, -11, 7),
    (1, -10, -1, -2),
    (5, 2, 6, 2),
    (0, 7, -8, 7),
    (2, 1, 8, -12),
    (4, 3, -1, 9),
    (14, -2, 3, -10),
    (-4, 1, 6, -2),
    (0, 5, 10, -3),
    (-6, 1, -7, 2),
    (9, 3, 5, 1),
    (0, 0, 0, -11),
    (5, 0, -6, -3),
    (3, -1, 2, 7),
    (-5, -6, 8, 4),
    (-5, -3, -1, -3),
    (2, 2, 9, 5),
    (7, 8, -5, 4),
    (-3, -6, -11, 3),
    (-3, 4, 14, 4),
    (-10, 8, 1, 7),
    (0, 0, 3, -6),
    (-5, -9, 3, -2),
    (1, 2, -10, 3),
    (4, 2, -9, 2),
    (2, 5, -1, 3),
    (2, -7, 6, 3),
    (-5, 3, 5, 5),
    (4, -5, 1, 7),
    (-10, -9, 6, -1),
    (9, 10, -2, -2),
    (-3, 1, -4, -4),
    (-3, 12, -4, -8),
    (-3, 4, -12, -2),
    (2, 0, -8, -2),
    (0, 2, 2, 1),
    (3, -7, 5, 7),
    (7, -12, 6, 2),
    (3, 3, -2, -2),
    (2, -4, 6, 8),
    (4, 3, -4, -8),
    (-3, 9, 0, -2),
    (1, -8, 1, 1),
    (-7, 3, -5, 1),
    (1, -5, 6, -7),
    (5, 5, 5, -10),
    (0, 2, 8, -4),
    (7, 8, -4, 7),
    (-8, -11, -12, 4),
    (1, 3, -1, -2),
    (-7, -1, -9, -7),
    (-11, 9, -3, -13),
    (8, -3, -2, 3),
    (6, 10, 8, -6),
    (-12, 2, 7, -2),
    (0, 1, 6, -4),
    (0, -6, -4, -3),
    (3, -8, 8, -1),
    (6, 6, -4, -5),
    (4, -1, 3, 1),
    (7, 0, 3, 4),
    (-6, 1, -10, -7),
    (-4, 6, 1, 0),
    (1, 4, -14, -1),
    (9, -7, -6, 3),
    (-10, -1, -4, 5),
    (9, 8, 0, -3),
    (-1, -5, -5, 2),
    (-1, -14, -6, -7),
    (1, -6, 2, 13),
    (-6, 5, 0, 0),
    (1, 4, 2, -6),
    (10, -4, -11, -5),
    (3, 2, 0, -1),
    (1, -8, 4, 10),
    (8, -6, -7, 4),
    (4, -3, 4, -5),
    (3, 4, 6, 13),
    (-11, -6, -6, -3),
    (2, 9, -4, -4),
    (-7, -3, 11, -10),
    (-4, -3, 3, -4),
    (4, 10, 6, -4),
    (4, -3, -4, -10),
    (4, 8, 13, 4),
    (11, -2, 0, 0),
    (-3, -7, 7, 9),
    (0, 1, 2, 5),
    (0, -11, 1, 0),
    (5, 1, -9, 1),
    (-5, -1, 1, -5),
    (7, 1, 0, -10),
    (-4, 6, -3, -2),
    (9, 8, -8, -4),
    (-1, 0, -2, -7),
    (4, 1, 2, -1),
    (8, -6, 7, -5),
    (-7, 4, 2, 4),
    (-5, 4, 9, 9),
    (-4, 4, 6, -8),
    (4, 12, -11, 1),
    (-2, 4, 1, -7),
    (-5, 3, 10, 1),
    (-5, 2, 3, -2),
    (-8, 0, 2, -5),
    (2, -12, -1, 3),
    (3, 1, -10, -5),
    (7, -2, -12, -7),
    (7, -1, 2, 1),
    (4, -2, -2, 3),
    (7, -5, 6, 8),
    (-1, -5, 5, -8),
    (-3, 4, 3, 1),
    (9, -5, -2, 11),
    (1, 5, 0, 7),
    (11, 6, 2, -2),
    (-10, 1, -6, 4),
    (-3, 3, -4, 1),
    (-4, 4, -1, 0),
    (0, 3, -9, 5),
    (8, -8, 2, 3),
    (1, -10, -1, -7),
    (-7, 0, -7, -5),
    (-11, 0, 11, -2),
    (-4, 3, -5, 8),
    (9, 6, -10, 5),
    (-11, -7, -3, 3),
    (-3, 5, 1, -7),
    (1, 1, 2, 1),
    (10, -1, 2, 3),
    (3, -5, 6, -5),
    (7, 2, 6, 5),
    (3, 3, 10, 0),
    (3, 0, -4, -11),
    (-3, 1, 7, 3),
    (11, -3, 5, 8),
    (8, -1, -6, 3),
    (-3, -2, -5, -5),
    (-4, 5, -3, -9),
    (-1, 3, 2, 9),
    (-5, -12, -1, 1),
    (3, 0, 1, 1),
    (3, 7, -1, 3),
    (-5, 3, 5, -4),
    (0, -11, 1, -12),
    (-5, 10, -1, 4),
    (8, 10, 0, -14),
    (7, 6, 1, -2),
    (2, 1, -1, -7),
    (5, 3, 11, -7),
    (-2, -3, -13, 6),
    (2, -9, 1, 3),
    (-8, -3, -3, -7),
    (2, 12, -7, 2),
    (2, 4, -5, -1),
    (-5, 3, 11, -6),
    (6, 4, 6, -2),
    (-1, 4, 5, -4),
    (-6, 12, -3, -6),
    (5, -8, -8, 7),
    (7, -6, 1, -6),
    (-3, -2, 4, 12),
    (10, 2, -9, 5),
)
