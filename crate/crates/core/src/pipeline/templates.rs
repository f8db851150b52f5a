//! Built-in program templates for corpus generation.

use serde::{Deserialize, Serialize};

use crate::minilang::{Mutation, MutationKind, Stmt};

/// Inclusive range an input is drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRange {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    pub source: String,
    pub inputs: Vec<InputRange>,
}

impl Template {
    pub fn new(name: &str, source: &str, inputs: &[(&str, i64, i64)]) -> Self {
        Template {
            name: name.to_string(),
            source: source.to_string(),
            inputs: inputs
                .iter()
                .map(|&(n, lo, hi)| InputRange { name: n.to_string(), lo, hi })
                .collect(),
        }
    }
}

/// Sixteen statements; failing runs t3 and t6 slice to S1, S3, S7, S8, S14
/// and S15, and the outputs guarded by S8 vary across the suite.
pub const GOLDEN_SOURCE: &str = "\
input x, y
a = x + y
b = y * 2
c = y / 6
if b > 10 {
    e = b - 1
} else {
    e = b + 1
}
d = c / 2
if a > 0 {
    f = e + b
    if f > 30 {
        f = f - 30
    }
    g = f * 2
    output(g)
    output(d)
    output(c)
}
output(e)
";

pub const GOLDEN_NAME: &str = "golden";

/// `c = y / 6` becomes `c = y / 7`.
pub fn golden_mutation() -> Mutation {
    Mutation { target: Stmt(3), kind: MutationKind::OffByOne, site: 0, payload: "7".into() }
}

/// `(id, x, y)`; t3 and t6 fail under the golden mutation.
pub const GOLDEN_TESTS: [(&str, i64, i64); 6] =
    [("t1", 0, 3), ("t2", -20, 10), ("t3", -48, 60), ("t4", 5, 0), ("t5", 9, -9), ("t6", 0, 18)];

pub fn builtin_templates() -> Vec<Template> {
    vec![
        Template::new(
            "triangle",
            "input a, b, c
kind = 0
if a + b > c && a + c > b && b + c > a {
    kind = 1
    if a == b || b == c || a == c {
        kind = 2
    }
    if a == b && b == c {
        kind = 3
    }
}
perim = 0
if kind > 0 {
    perim = a + b + c
}
output(kind)
output(perim)
",
            &[("a", 1, 9), ("b", 1, 9), ("c", 1, 9)],
        ),
        Template::new(
            "gcd",
            "input a, b
x = a
y = b
steps = 0
while y != 0 {
    r = x % y
    x = y
    y = r
    steps = steps + 1
}
big = 0
if x > 3 {
    big = 1
}
output(x)
output(steps)
output(big)
",
            &[("a", 1, 60), ("b", 1, 60)],
        ),
        Template::new(
            "max3",
            "input a, b, c
m = a
if b > m {
    m = b
}
if c > m {
    m = c
}
low = a
if b < low {
    low = b
}
if c < low {
    low = c
}
spread = m - low
wide = 0
if spread > 12 {
    wide = 1
}
output(m)
output(wide)
",
            &[("a", -20, 20), ("b", -20, 20), ("c", -20, 20)],
        ),
        Template::new(
            "leap",
            "input y
leap = 0
if y % 4 == 0 {
    leap = 1
    if y % 100 == 0 {
        leap = 0
        if y % 400 == 0 {
            leap = 1
        }
    }
}
days = 365 + leap
output(leap)
output(days)
",
            &[("y", 1890, 2110)],
        ),
        Template::new(
            "grade",
            "input score
g = 0
if score >= 90 {
    g = 4
} else {
    if score >= 80 {
        g = 3
    } else {
        if score >= 70 {
            g = 2
        } else {
            if score >= 60 {
                g = 1
            }
        }
    }
}
pass = 0
if g > 0 {
    pass = 1
}
output(g)
output(pass)
",
            &[("score", 40, 100)],
        ),
        Template::new(
            "tax",
            "input income
tax = 0
if income > 100 {
    tax = (income - 100) / 10
}
if income > 500 {
    tax = tax + (income - 500) / 5
}
if income > 900 {
    tax = tax + (income - 900) / 4
}
net = income - tax
output(tax)
output(net)
",
            &[("income", 0, 1200)],
        ),
        Template::new(
            "digitsum",
            "input n
s = 0
k = n
count = 0
while k > 0 {
    s = s + k % 10
    k = k / 10
    count = count + 1
}
even = 0
if s % 2 == 0 {
    even = 1
}
output(s)
output(count)
output(even)
",
            &[("n", 0, 9999)],
        ),
        Template::new(
            "power",
            "input base, exp
r = 1
i = 0
while i < exp {
    r = r * base
    i = i + 1
}
neg = 0
if r < 0 {
    neg = 1
}
output(r)
output(neg)
",
            &[("base", -4, 4), ("exp", 0, 6)],
        ),
        Template::new(
            "clamp",
            "input v, lo, hi
out = v
if lo > hi {
    t = lo
    lo = hi
    hi = t
}
if out < lo {
    out = lo
}
if out > hi {
    out = hi
}
changed = 0
if out != v {
    changed = 1
}
output(out)
output(changed)
",
            &[("v", -30, 30), ("lo", -15, 15), ("hi", -15, 15)],
        ),
        Template::new(
            "median3",
            "input a, b, c
med = a
if a > b {
    if b > c {
        med = b
    } else {
        if a > c {
            med = c
        }
    }
} else {
    if a > c {
        med = a
    } else {
        if b > c {
            med = c
        } else {
            med = b
        }
    }
}
output(med)
",
            &[("a", -10, 10), ("b", -10, 10), ("c", -10, 10)],
        ),
        Template::new(
            "shipping",
            "input weight, zone
cost = 5
if weight > 2 {
    cost = cost + (weight - 2) * 3
}
if zone == 2 {
    cost = cost + 4
}
if zone >= 3 {
    cost = cost * 2
}
free = 0
if cost > 40 {
    cost = 40
    free = 1
}
output(cost)
output(free)
",
            &[("weight", 0, 15), ("zone", 1, 4)],
        ),
        Template::new(
            "collatz",
            "input n
k = n
steps = 0
peak = n
while k != 1 && steps < 60 {
    if k % 2 == 0 {
        k = k / 2
    } else {
        k = 3 * k + 1
    }
    if k > peak {
        peak = k
    }
    steps = steps + 1
}
long = 0
if steps > 15 {
    long = 1
}
high = 0
if peak >= 100 {
    high = 1
}
output(long)
output(high)
",
            &[("n", 1, 40)],
        ),
        Template::new(
            "sumrange",
            "input lo, hi
s = 0
odd = 0
i = lo
while i <= hi {
    s = s + i
    if i % 2 != 0 {
        odd = odd + 1
    }
    i = i + 1
}
avg = 0
if hi >= lo {
    avg = s / (hi - lo + 1)
}
output(s)
output(odd)
output(avg)
",
            &[("lo", -10, 10), ("hi", -5, 20)],
        ),
        Template::new(
            "divisors",
            "input n
count = 0
total = 0
d = 1
while d <= n {
    if n % d == 0 {
        count = count + 1
        total = total + d
    }
    d = d + 1
}
prime = 0
if count == 2 {
    prime = 1
}
perfect = 0
if total - n == n {
    perfect = 1
}
output(count)
output(prime)
output(perfect)
",
            &[("n", 1, 40)],
        ),
        Template::new(
            "fib",
            "input n
a = 0
b = 1
i = 0
while i < n {
    t = a + b
    a = b
    b = t
    i = i + 1
}
even = 0
if a % 2 == 0 {
    even = 1
}
output(a)
output(even)
",
            &[("n", 0, 20)],
        ),
        Template::new(
            "bmi",
            "input w, h
h2 = h * h
bmi = w * 10000 / h2
cls = 1
if bmi < 18 {
    cls = 0
}
if bmi >= 25 {
    cls = 2
}
if bmi >= 30 {
    cls = 3
}
risk = 0
if cls >= 2 && w > 90 {
    risk = 1
}
output(bmi)
output(cls)
output(risk)
",
            &[("w", 40, 130), ("h", 150, 200)],
        ),
        Template::new(
            "account",
            "input bal, amt, kind
fee = 0
if kind == 1 {
    bal = bal + amt
} else {
    if amt > bal {
        fee = 25
        bal = bal - fee
    } else {
        bal = bal - amt
        if amt > 100 {
            fee = 2
        }
        bal = bal - fee
    }
}
over = 0
if bal < 0 {
    over = 1
}
output(bal)
output(fee)
output(over)
",
            &[("bal", 0, 300), ("amt", 0, 250), ("kind", 1, 2)],
        ),
        Template::new(
            "temperature",
            "input c
f = c * 9 / 5 + 32
state = 1
if c <= 0 {
    state = 0
}
if c >= 100 {
    state = 2
}
warn = 0
if f > 95 || f < 14 {
    warn = 1
}
output(f)
output(state)
output(warn)
",
            &[("c", -30, 110)],
        ),
        Template::new(
            "parity",
            "input a, b
evens = 0
odds = 0
if a % 2 == 0 {
    evens = evens + 1
} else {
    odds = odds + 1
}
if b % 2 == 0 {
    evens = evens + 1
} else {
    odds = odds + 1
}
mix = 0
if evens == 1 {
    mix = a + b
}
output(evens)
output(odds)
output(mix)
",
            &[("a", -20, 20), ("b", -20, 20)],
        ),
        Template::new(
            "sign",
            "input x, y
sx = 0
if x > 0 {
    sx = 1
}
if x < 0 {
    sx = -1
}
quad = 0
if sx > 0 && y > 0 {
    quad = 1
}
if sx < 0 && y > 0 {
    quad = 2
}
if sx < 0 && y < 0 {
    quad = 3
}
if sx > 0 && y < 0 {
    quad = 4
}
output(sx)
output(quad)
",
            &[("x", -9, 9), ("y", -9, 9)],
        ),
        Template::new(
            "discount",
            "input price, qty, member
total = price * qty
off = 0
if qty >= 10 {
    off = total / 10
}
if member == 1 {
    off = off + total / 20
}
if off > 50 {
    off = 50
}
pay = total - off
output(off)
output(pay)
",
            &[("price", 1, 30), ("qty", 1, 20), ("member", 0, 1)],
        ),
        Template::new(
            "isqrt",
            "input n
r = 0
while (r + 1) * (r + 1) <= n {
    r = r + 1
}
rem = n - r * r
square = 0
if rem == 0 {
    square = 1
}
output(r)
output(rem)
output(square)
",
            &[("n", 0, 200)],
        ),
        Template::new(
            "minmax",
            "input a, b, c, d
lo = a
hi = a
if b < lo {
    lo = b
}
if b > hi {
    hi = b
}
if c < lo {
    lo = c
}
if c > hi {
    hi = c
}
if d < lo {
    lo = d
}
if d > hi {
    hi = d
}
range = hi - lo
output(lo)
output(hi)
output(range)
",
            &[("a", -20, 20), ("b", -20, 20), ("c", -20, 20), ("d", -20, 20)],
        ),
    ]
}
