//! Shipped, versioned data tables for the character- and token-level
//! transforms: QWERTY adjacency for typo simulation and the number-word
//! inventory for numeric replacement.

/// Adjacent keys per lowercase letter on a standard staggered QWERTY layout
/// (horizontal neighbors plus the diagonals of the rows above and below).
/// The table is symmetric and no letter neighbors itself.
pub const QWERTY_NEIGHBORS: [(char, &str); 26] = [
    ('a', "qwsz"),
    ('b', "ghvn"),
    ('c', "dfxv"),
    ('d', "ersfxc"),
    ('e', "wrsd"),
    ('f', "rtdgcv"),
    ('g', "tyfhvb"),
    ('h', "yugjbn"),
    ('i', "uojk"),
    ('j', "uihknm"),
    ('k', "iojlm"),
    ('l', "opk"),
    ('m', "jkn"),
    ('n', "hjbm"),
    ('o', "ipkl"),
    ('p', "ol"),
    ('q', "wa"),
    ('r', "etdf"),
    ('s', "weadzx"),
    ('t', "ryfg"),
    ('u', "yihj"),
    ('v', "fgcb"),
    ('w', "qeas"),
    ('x', "sdzc"),
    ('y', "tugh"),
    ('z', "asx"),
];

/// Neighbor keys for a letter, looked up case-insensitively.
pub fn neighbors(c: char) -> Option<&'static str> {
    let lower = c.to_ascii_lowercase();
    QWERTY_NEIGHBORS
        .iter()
        .find(|(key, _)| *key == lower)
        .map(|(_, adjacent)| *adjacent)
}

/// Number words eligible for replacement: zero through twenty, the tens up
/// to ninety, hundred and thousand.
pub const NUMBER_WORDS: [&str; 30] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    "hundred", "thousand",
];
