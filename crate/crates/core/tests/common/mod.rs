#![allow(dead_code)]

use sttlp::rational::Rational;

/// `(n, i, search trees, primary directions, false facets, new vertices, classes)`.
pub const CATALOG_STATS: &[(usize, usize, u128, usize, usize, usize, usize)] = &[
    (3, 0, 5, 9, 0, 0, 0),
    (4, 0, 14, 32, 0, 0, 0),
    (4, 1, 16, 32, 0, 0, 0),
    (5, 0, 42, 145, 0, 0, 0),
    (5, 1, 51, 152, 0, 0, 0),
    (5, 2, 65, 161, 0, 0, 0),
    (6, 0, 132, 776, 0, 0, 0),
    (6, 1, 166, 910, 0, 0, 0),
    (6, 2, 176, 908, 0, 0, 0),
    (6, 3, 214, 949, 0, 0, 0),
    (6, 4, 236, 978, 0, 0, 0),
    (6, 5, 326, 1071, 0, 0, 0),
    (7, 0, 429, 4839, 0, 0, 0),
    (7, 1, 552, 5932, 0, 0, 0),
    (7, 2, 605, 6224, 0, 0, 0),
    (7, 3, 662, 6364, 39, 9, 2),
    (7, 4, 836, 6817, 0, 0, 0),
    (7, 5, 807, 7002, 0, 0, 0),
    (7, 6, 930, 6933, 0, 0, 0),
    (7, 7, 721, 7077, 0, 0, 0),
    (7, 8, 1135, 7534, 0, 0, 0),
    (7, 9, 1337, 7579, 0, 0, 0),
    (7, 10, 1957, 8733, 0, 0, 0),
    (8, 0, 1430, 35097, 0, 0, 0),
    (8, 1, 1870, 44103, 0, 0, 0),
    (8, 2, 2094, 46368, 0, 0, 0),
    (8, 3, 2164, 47535, 0, 0, 0),
    (8, 4, 2416, 48291, 362, 65, 38),
    (8, 5, 2952, 56376, 120, 2, 1),
    (8, 6, 2802, 56724, 10, 2, 1),
    (8, 7, 3232, 57252, 0, 0, 0),
    (8, 8, 2952, 51172, 0, 0, 0),
    (8, 9, 3490, 53029, 0, 0, 0),
    (8, 10, 2470, 53923, 0, 0, 0),
    (8, 11, 3988, 54201, 78, 18, 4),
    (8, 12, 3332, 56404, 528, 60, 24),
    (8, 13, 4076, 65733, 946, 28, 4),
    (8, 14, 4674, 64110, 0, 0, 0),
    (8, 15, 4884, 62553, 0, 0, 0),
    (8, 16, 3996, 63179, 0, 0, 0),
    (8, 17, 5940, 59967, 0, 0, 0),
    (8, 18, 5142, 58200, 0, 0, 0),
    (8, 19, 6842, 71285, 0, 0, 0),
    (8, 20, 7284, 68654, 0, 0, 0),
    (8, 21, 8970, 68714, 0, 0, 0),
    (8, 22, 13700, 83434, 0, 0, 0),
];

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_int(x)).collect()
}

/// Parses `"2,9/2,1"`.
pub fn rats(s: &str) -> Vec<Rational> {
    s.split(',').map(|x| x.trim().parse().unwrap()).collect()
}

pub fn long_enabled() -> bool {
    std::env::var_os("STT_LONG").is_some()
}

/// Half-integral optimum on U_7_3 for w = (3,2,0,2,3,3,10), as `var=value`
/// lines; D is the column sum of X.
pub const LONG_STAR_VERTEX: &str = "
X1_2=1/2\nX1_3=1/2
X2_1=1/2\nX2_3=1\nX2_4=1/2\nX2_5=1/2\nX2_6=1/2
X4_1=1/2\nX4_2=1/2\nX4_3=1\nX4_5=1/2\nX4_6=1/2
X5_3=1/2\nX5_4=1/2
X6_1=1/2\nX6_2=1/2\nX6_3=1\nX6_4=1/2\nX6_5=1/2\nX6_7=1/2
X7_1=1/2\nX7_2=1/2\nX7_3=1/2\nX7_4=1/2\nX7_5=1/2\nX7_6=1/2
Z2_1_3=1/2\nZ2_1_4=1/2\nZ2_1_5=1/2\nZ4_1_5=1/2\nZ2_1_6=1/2\nZ6_1_7=1/2
Z4_2_5=1/2\nZ6_2_7=1/2
Z4_3_5=1/2\nZ6_3_7=1/2\nZ6_4_7=1/2\nZ4_5_6=1/2\nZ6_5_7=1/2
D1=2\nD2=2\nD3=9/2\nD4=2\nD5=2\nD6=3/2\nD7=1/2
";

pub fn long_star_weights() -> Vec<Rational> {
    ints(&[3, 2, 0, 2, 3, 3, 10])
}

/// Path-3 vertex as its `(X12, X21, X23, X32, X13, X31, Z213)` bits.
pub fn path3_row(bits: [i64; 7]) -> sttlp::lpmodel::Point {
    let m = sttlp::lpmodel::build_primal(&sttlp::topology::Topology::path(3));
    let names = ["X1_2", "X2_1", "X2_3", "X3_2", "X1_3", "X3_1", "Z2_1_3"];
    let mut text: String = names.iter().zip(bits).map(|(n, b)| format!("{n}={b}\n")).collect();
    // depths are column sums of the ancestry matrix
    let d = [bits[1] + bits[5], bits[0] + bits[3], bits[2] + bits[4]];
    for (i, v) in d.iter().enumerate() {
        text.push_str(&format!("D{}={v}\n", i + 1));
    }
    m.parse_point(&text).unwrap()
}

pub const PATH3_VERTICES: [[i64; 7]; 9] = [
    [0, 1, 0, 1, 0, 1, 0],
    [0, 1, 0, 1, 1, 0, 0],
    [0, 1, 1, 0, 0, 0, 1],
    [0, 1, 1, 0, 0, 1, 0],
    [0, 1, 1, 0, 1, 0, 0],
    [1, 0, 0, 1, 0, 1, 0],
    [1, 0, 0, 1, 1, 0, 0],
    [1, 0, 1, 0, 1, 0, 0],
    [1, 0, 1, 0, 0, 1, 0],
];
