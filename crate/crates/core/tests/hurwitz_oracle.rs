use donaldson_core::modforms::hurwitz;
use donaldson_core::rat::{rat, Rat};

/// Weighted count of SL2(Z)-classes of positive definite forms of
/// discriminant -n, by scanning all (a, b, c) with |b| <= a <= c.
fn brute_force(n: i64) -> Rat {
    if n == 0 {
        return rat(-1, 12);
    }
    if n % 4 == 1 || n % 4 == 2 {
        return Rat::zero();
    }
    let mut total = Rat::zero();
    for b in -n..=n {
        if (b * b + n) % 4 != 0 {
            continue;
        }
        let ac = (b * b + n) / 4;
        for a in 1..=ac {
            if ac % a != 0 {
                continue;
            }
            let c = ac / a;
            if b.abs() > a || a > c {
                continue;
            }
            // boundary forms are counted once
            if b < 0 && (-b == a || a == c) {
                continue;
            }
            total += if a == b && b == c {
                rat(1, 3)
            } else if b == 0 && a == c {
                rat(1, 2)
            } else {
                Rat::one()
            };
        }
    }
    total
}

fn sigma(n: i64) -> i64 {
    (1..=n).filter(|d| n % d == 0).sum()
}

#[test]
fn agrees_with_brute_force_up_to_200() {
    for n in 0..=200u64 {
        assert_eq!(hurwitz(n), brute_force(n as i64), "H({n})");
    }
}

#[test]
fn satisfies_the_kronecker_hurwitz_relation() {
    // sum_{t^2 <= 4n} H(4n - t^2) = 2 sigma(n) - sum_{d | n} min(d, n/d)
    for n in 1..=50i64 {
        let mut lhs = Rat::zero();
        let mut t = -(2 * n);
        while t <= 2 * n {
            if t * t <= 4 * n {
                lhs += hurwitz((4 * n - t * t) as u64);
            }
            t += 1;
        }
        let small: i64 = (1..=n).filter(|d| n % d == 0).map(|d| d.min(n / d)).sum();
        assert_eq!(lhs, Rat::from(2 * sigma(n) - small), "n = {n}");
    }
}

#[test]
fn known_values() {
    let expected = [(0, rat(-1, 12)), (3, rat(1, 3)), (4, rat(1, 2)), (7, Rat::one()), (8, Rat::one()),
        (11, Rat::one()), (12, rat(4, 3)), (15, Rat::from(2)), (16, rat(3, 2)), (23, Rat::from(3))];
    for (n, h) in expected {
        assert_eq!(hurwitz(n), h, "H({n})");
    }
    assert_eq!(hurwitz(1), Rat::zero());
    assert_eq!(hurwitz(2), Rat::zero());
}
