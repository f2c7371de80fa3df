// Coefficient rows in the order x1 x2 x3 X11 X22 X33 X12 X13 X23 b.

pub(crate) const ETRI1_TABLE: [[i64; 10]; 24] = [
    [2, 0, 0, 1, 0, 0, -2, -2, 1, 0],
    [0, 1, 0, 1, 0, 0, -2, 2, -1, 0],
    [0, 0, 1, 1, 0, 0, 2, -2, -1, 0],
    [-2, -1, -1, 1, 0, 0, 2, 2, 1, 1],
    [-4, -2, -2, 1, 0, 0, 2, 2, 1, 3],
    [-2, -1, 2, 1, 0, 0, 2, -2, -1, 1],
    [-2, 2, -1, 1, 0, 0, -2, 2, -1, 1],
    [0, 1, 1, 1, 0, 0, -2, -2, 1, 0],
    [0, 2, 0, 0, 1, 0, -2, 1, -2, 0],
    [1, 0, 0, 0, 1, 0, -2, -1, 2, 0],
    [-2, -4, -2, 0, 1, 0, 2, 1, 2, 3],
    [-1, -2, 2, 0, 1, 0, 2, -1, -2, 1],
    [0, 0, 1, 0, 1, 0, 2, -1, -2, 0],
    [-1, -2, -1, 0, 1, 0, 2, 1, 2, 1],
    [2, -2, -1, 0, 1, 0, -2, -1, 2, 1],
    [1, 0, 1, 0, 1, 0, -2, 1, -2, 0],
    [0, 0, 2, 0, 0, 1, 1, -2, -2, 0],
    [-2, -2, -4, 0, 0, 1, 1, 2, 2, 3],
    [1, 0, 0, 0, 0, 1, -1, -2, 2, 0],
    [-1, 2, -2, 0, 0, 1, -1, 2, -2, 1],
    [0, 1, 0, 0, 0, 1, -1, 2, -2, 0],
    [2, -1, -2, 0, 0, 1, -1, -2, 2, 1],
    [-1, -1, -2, 0, 0, 1, 1, 2, 2, 1],
    [1, 1, 0, 0, 0, 1, 1, -2, -2, 0],
];

pub(crate) const ETRI2_TABLE: [[i64; 10]; 24] = [
    [4, 0, 0, 4, 0, 0, -4, -4, 1, 0],
    [0, 1, 0, 4, 0, 0, -4, 4, -1, 0],
    [0, 0, 1, 4, 0, 0, 4, -4, -1, 0],
    [-4, -1, -1, 4, 0, 0, 4, 4, 1, 1],
    [-12, -4, -4, 4, 0, 0, 4, 4, 1, 8],
    [-8, -3, 4, 4, 0, 0, 4, -4, -1, 4],
    [-8, 4, -3, 4, 0, 0, -4, 4, -1, 4],
    [-4, 3, 3, 4, 0, 0, -4, -4, 1, 1],
    [0, 4, 0, 0, 4, 0, -4, 1, -4, 0],
    [1, 0, 0, 0, 4, 0, -4, -1, 4, 0],
    [-4, -12, -4, 0, 4, 0, 4, 1, 4, 8],
    [-3, -8, 4, 0, 4, 0, 4, -1, -4, 4],
    [0, 0, 1, 0, 4, 0, 4, -1, -4, 0],
    [-1, -4, -1, 0, 4, 0, 4, 1, 4, 1],
    [4, -8, -3, 0, 4, 0, -4, -1, 4, 4],
    [3, -4, 3, 0, 4, 0, -4, 1, -4, 1],
    [0, 0, 4, 0, 0, 4, 1, -4, -4, 0],
    [-4, -4, -12, 0, 0, 4, 1, 4, 4, 8],
    [1, 0, 0, 0, 0, 4, -1, -4, 4, 0],
    [-3, 4, -8, 0, 0, 4, -1, 4, -4, 4],
    [0, 1, 0, 0, 0, 4, -1, 4, -4, 0],
    [4, -3, -8, 0, 0, 4, -1, -4, 4, 4],
    [-1, -1, -4, 0, 0, 4, 1, 4, 4, 1],
    [3, 3, -4, 0, 0, 4, 1, -4, -4, 1],
];

pub(crate) const ETRI3_TABLE: [[i64; 10]; 48] = [
    [4, 0, 0, 4, 1, 0, -8, -4, 3, 0],
    [0, 3, 0, 4, 1, 0, -8, 4, -3, 0],
    [-4, -2, 3, 4, 1, 0, 8, -4, -3, 1],
    [-8, -5, -3, 4, 1, 0, 8, 4, 3, 4],
    [-12, -8, -4, 4, 1, 0, 8, 4, 3, 8],
    [-8, -5, 4, 4, 1, 0, 8, -4, -3, 4],
    [-4, 6, -1, 4, 1, 0, -8, 4, -3, 1],
    [0, 3, 1, 4, 1, 0, -8, -4, 3, 0],
    [4, 0, 0, 4, 0, 1, -4, -8, 3, 0],
    [-4, 3, -2, 4, 0, 1, -4, 8, -3, 1],
    [0, 0, 3, 4, 0, 1, 4, -8, -3, 0],
    [-8, -3, -5, 4, 0, 1, 4, 8, 3, 4],
    [-12, -4, -8, 4, 0, 1, 4, 8, 3, 8],
    [-4, -1, 6, 4, 0, 1, 4, -8, -3, 1],
    [-8, 4, -5, 4, 0, 1, -4, 8, -3, 4],
    [0, 1, 3, 4, 0, 1, -4, -8, 3, 0],
    [0, 4, 0, 1, 4, 0, -8, 3, -4, 0],
    [3, 0, 0, 1, 4, 0, -8, -3, 4, 0],
    [-8, -12, -4, 1, 4, 0, 8, 3, 4, 8],
    [-5, -8, 4, 1, 4, 0, 8, -3, -4, 4],
    [-2, -4, 3, 1, 4, 0, 8, -3, -4, 1],
    [-5, -8, -3, 1, 4, 0, 8, 3, 4, 4],
    [6, -4, -1, 1, 4, 0, -8, -3, 4, 1],
    [3, 0, 1, 1, 4, 0, -8, 3, -4, 0],
    [0, 4, 0, 0, 4, 1, -4, 3, -8, 0],
    [3, -4, -2, 0, 4, 1, -4, -3, 8, 1],
    [-4, -12, -8, 0, 4, 1, 4, 3, 8, 8],
    [-1, -4, 6, 0, 4, 1, 4, -3, -8, 1],
    [0, 0, 3, 0, 4, 1, 4, -3, -8, 0],
    [-3, -8, -5, 0, 4, 1, 4, 3, 8, 4],
    [4, -8, -5, 0, 4, 1, -4, -3, 8, 4],
    [1, 0, 3, 0, 4, 1, -4, 3, -8, 0],
    [0, 0, 4, 1, 0, 4, 3, -8, -4, 0],
    [-8, -4, -12, 1, 0, 4, 3, 8, 4, 8],
    [3, 0, 0, 1, 0, 4, -3, -8, 4, 0],
    [-5, 4, -8, 1, 0, 4, -3, 8, -4, 4],
    [-2, 3, -4, 1, 0, 4, -3, 8, -4, 1],
    [6, -1, -4, 1, 0, 4, -3, -8, 4, 1],
    [-5, -3, -8, 1, 0, 4, 3, 8, 4, 4],
    [3, 1, 0, 1, 0, 4, 3, -8, -4, 0],
    [0, 0, 4, 0, 1, 4, 3, -4, -8, 0],
    [-4, -8, -12, 0, 1, 4, 3, 4, 8, 8],
    [3, -2, -4, 0, 1, 4, -3, -4, 8, 1],
    [-1, 6, -4, 0, 1, 4, -3, 4, -8, 1],
    [0, 3, 0, 0, 1, 4, -3, 4, -8, 0],
    [4, -5, -8, 0, 1, 4, -3, -4, 8, 4],
    [-3, -5, -8, 0, 1, 4, 3, 4, 8, 4],
    [1, 3, 0, 0, 1, 4, 3, -4, -8, 0],
];

