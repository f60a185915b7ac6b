//! Reference implementations the production code is checked against.
#![allow(dead_code)]

use regex::Regex;

/// Topic matching by translation to an anchored regex over the key rendered
/// as `.w1.w2...`: a literal is `\.w`, `*` is one `\.[^.]+` and `#` is any
/// number of them.
pub fn topic_regex(pattern: &str) -> Regex {
    let mut re = String::from("^");
    for tok in pattern.split('.') {
        match tok {
            "*" => re.push_str(r"\.[^.]+"),
            "#" => re.push_str(r"(?:\.[^.]+)*"),
            lit => {
                re.push_str(r"\.");
                re.push_str(&regex::escape(lit));
            }
        }
    }
    re.push('$');
    Regex::new(&re).unwrap()
}

pub fn regex_match(re: &Regex, key: &str) -> bool {
    re.is_match(&format!(".{key}"))
}

/// Every dot-joined word sequence of length 1..=max_len over `alphabet`.
pub fn words(alphabet: &[&str], max_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<&str>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &layer {
            for a in alphabet {
                let mut w = prefix.clone();
                w.push(*a);
                out.push(w.join("."));
                next.push(w);
            }
        }
        layer = next;
    }
    out
}

/// A Gaussian term as (center, sigma).
pub type Term = (f64, f64);

/// One input/output pair of the head controller, written out from the
/// published table with positive and zero rows in monotone order.
pub struct Axis {
    pub input: [Term; 3],
    pub output: [Term; 3],
    pub universe: (f64, f64),
    pub frame_center: f64,
}

/// Terms are (negative, zero, positive).
pub fn yaw_axis() -> Axis {
    Axis {
        input: [(0.0, 80.0), (160.0, 50.0), (320.0, 80.0)],
        output: [(-15.0, 10.0), (0.0, 10.0), (15.0, 10.0)],
        universe: (-45.0, 45.0),
        frame_center: 160.0,
    }
}

pub fn pitch_axis() -> Axis {
    Axis {
        input: [(0.0, 70.0), (120.0, 40.0), (240.0, 70.0)],
        output: [(-7.0, 6.0), (0.0, 6.0), (7.0, 6.0)],
        universe: (-25.0, 25.0),
        frame_center: 120.0,
    }
}

fn mf(x: f64, (c, s): Term) -> f64 {
    let z = (x - c) / s;
    (-0.5 * z * z).exp()
}

/// Brute-force Mamdani evaluation: negative input fires the positive output
/// and vice versa, zero fires zero; clip with min, aggregate with max and
/// integrate the centroid with composite Simpson on `n` (even) intervals.
pub fn brute_force(axis: &Axis, input: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let w = [mf(input, axis.input[0]), mf(input, axis.input[1]), mf(input, axis.input[2])];
    // (firing strength, consequent term)
    let rules = [(w[0], axis.output[2]), (w[1], axis.output[1]), (w[2], axis.output[0])];
    let (lo, hi) = axis.universe;
    let h = (hi - lo) / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=n {
        let x = lo + i as f64 * h;
        let mu = rules.iter().map(|&(w, t)| w.min(mf(x, t))).fold(0.0, f64::max);
        let weight = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        num += weight * x * mu;
        den += weight * mu;
    }
    num / den
}

/// Oracle step 0.001 deg, a tenth of the controller default.
pub fn oracle_yaw(x: f64) -> f64 {
    brute_force(&yaw_axis(), x, 90_000)
}

pub fn oracle_pitch(y: f64) -> f64 {
    brute_force(&pitch_axis(), y, 50_000)
}
