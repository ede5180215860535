//! Small TPC-H-shaped data with consistent foreign keys.
//!
//! Sizes default to a desk scale (300 customers, 1500 orders, ~6000
//! lineitems). The fixture customer `Customer#000070919` always exists with
//! several orders and at least one lineitem of quantity > 30 and discount
//! < 0.03, and a few hundred orders have keys below 10000, so every worked
//! batch query has a non-empty answer.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::Catalog;
use crate::executor::{Chunk, Dataset};

pub const FIXTURE_CUSTKEY: i64 = 70919;

const REGIONS: [&str; 5] = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"];

const NATIONS: [(&str, usize); 25] = [
    ("ALGERIA", 0),
    ("ARGENTINA", 1),
    ("BRAZIL", 1),
    ("CANADA", 1),
    ("EGYPT", 4),
    ("ETHIOPIA", 0),
    ("FRANCE", 3),
    ("GERMANY", 3),
    ("INDIA", 2),
    ("INDONESIA", 2),
    ("IRAN", 4),
    ("IRAQ", 4),
    ("JAPAN", 2),
    ("JORDAN", 4),
    ("KENYA", 0),
    ("MOROCCO", 0),
    ("MOZAMBIQUE", 0),
    ("PERU", 1),
    ("CHINA", 2),
    ("ROMANIA", 3),
    ("SAUDI ARABIA", 4),
    ("VIETNAM", 2),
    ("RUSSIA", 3),
    ("UNITED KINGDOM", 3),
    ("UNITED STATES", 1),
];

const SEGMENTS: [&str; 5] = ["AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"];
const PRIORITIES: [&str; 5] = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"];
const SHIP_MODES: [&str; 7] = ["REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"];
const INSTRUCTIONS: [&str; 4] = ["DELIVER IN PERSON", "COLLECT COD", "NONE", "TAKE BACK RETURN"];
const WORDS: [&str; 12] = [
    "furiously",
    "quickly",
    "blithely",
    "regular",
    "express",
    "final",
    "pending",
    "ironic",
    "deposits",
    "packages",
    "requests",
    "accounts",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub customers: usize,
    pub orders: usize,
    /// Orders keyed below 10000.
    pub small_orders: usize,
    pub max_lines: usize,
}

impl Default for Scale {
    fn default() -> Self {
        Scale {
            customers: 300,
            orders: 1500,
            small_orders: 200,
            max_lines: 7,
        }
    }
}

impl Scale {
    /// Tiny sizes for property tests.
    pub fn tiny() -> Self {
        Scale {
            customers: 20,
            orders: 60,
            small_orders: 20,
            max_lines: 4,
        }
    }
}

fn comment(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..5);
    (0..n)
        .map(|_| *WORDS.choose(rng).expect("words"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn date(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{}-{:02}-{:02}",
        rng.gen_range(1992..1999),
        rng.gen_range(1..13),
        rng.gen_range(1..29)
    )
}

fn money(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> String {
    let cents = rng.gen_range(lo * 100..=hi * 100);
    format!(
        "{}{}.{:02}",
        if cents < 0 { "-" } else { "" },
        cents.abs() / 100,
        cents.abs() % 100
    )
}

fn chunk(catalog: &Catalog, table: &str, lines: &[String]) -> Chunk {
    let schema = catalog
        .columns(table)
        .expect("table in the built-in profile")
        .into_iter()
        .map(str::to_string)
        .collect();
    Chunk::parse_tbl(table, schema, &lines.join("\n")).expect("generated rows match the schema")
}

/// Deterministic for a given seed and scale.
pub fn generate(seed: u64, scale: &Scale) -> Dataset {
    let catalog = Catalog::load_default_tpch();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset::new();

    let region: Vec<String> = REGIONS
        .iter()
        .enumerate()
        .map(|(i, name)| format!("{i}|{name}|{}|", comment(&mut rng)))
        .collect();
    ds.insert("region", chunk(&catalog, "region", &region));

    let nation: Vec<String> = NATIONS
        .iter()
        .enumerate()
        .map(|(i, (name, r))| format!("{i}|{name}|{r}|{}|", comment(&mut rng)))
        .collect();
    ds.insert("nation", chunk(&catalog, "nation", &nation));

    let customers = scale.customers.max(1);
    let mut custkeys: Vec<i64> = (1..customers as i64).collect();
    custkeys.push(FIXTURE_CUSTKEY);
    let customer: Vec<String> = custkeys
        .iter()
        .map(|k| {
            let nation = rng.gen_range(0..25);
            format!(
                "{k}|Customer#{k:09}|addr {}{}|{nation}|{}-{:03}-{:03}-{:04}|{}|{}|{}|",
                WORDS.choose(&mut rng).expect("words"),
                rng.gen_range(1..1000),
                nation + 10,
                rng.gen_range(100..1000),
                rng.gen_range(100..1000),
                rng.gen_range(1000..10000),
                money(&mut rng, -999, 9999),
                SEGMENTS.choose(&mut rng).expect("segments"),
                comment(&mut rng)
            )
        })
        .collect();
    ds.insert("customer", chunk(&catalog, "customer", &customer));

    let small = scale.small_orders.min(scale.orders);
    let step = if small > 0 { (9999 / small as i64).max(1) } else { 1 };
    let mut orders = Vec::new();
    let mut lineitem = Vec::new();
    let mut fixture_orders = 0;
    for i in 0..scale.orders {
        let key = if i < small {
            1 + i as i64 * step
        } else {
            10_001 + (i - small) as i64 * 37
        };
        // every fifth order of the first few belongs to the fixture customer
        let cust = if i % 5 == 0 && fixture_orders < 6 {
            fixture_orders += 1;
            FIXTURE_CUSTKEY
        } else {
            *custkeys.choose(&mut rng).expect("customers")
        };
        let status = ["F", "O", "P"].choose(&mut rng).expect("status");
        orders.push(format!(
            "{key}|{cust}|{status}|{}|{}|{}|Clerk#{:09}|0|{}|",
            money(&mut rng, 800, 30_000),
            date(&mut rng),
            PRIORITIES.choose(&mut rng).expect("priorities"),
            rng.gen_range(1..1000),
            comment(&mut rng)
        ));
        let lines = rng.gen_range(1..=scale.max_lines.max(1));
        for ln in 1..=lines {
            let (quantity, discount) = if cust == FIXTURE_CUSTKEY && ln == 1 {
                (40, 1)
            } else {
                (rng.gen_range(1..=50), rng.gen_range(0..=10))
            };
            lineitem.push(format!(
                "{key}|{}|{}|{ln}|{quantity}|{}|0.{discount:02}|0.0{}|{}|{}|{}|{}|{}|{}|{}|{}|",
                rng.gen_range(1..200_000),
                rng.gen_range(1..10_000),
                money(&mut rng, 900, 100_000),
                rng.gen_range(0..9),
                ["R", "A", "N"].choose(&mut rng).expect("flags"),
                ["O", "F"].choose(&mut rng).expect("status"),
                date(&mut rng),
                date(&mut rng),
                date(&mut rng),
                INSTRUCTIONS.choose(&mut rng).expect("instructions"),
                SHIP_MODES.choose(&mut rng).expect("modes"),
                comment(&mut rng)
            ));
        }
    }
    ds.insert("orders", chunk(&catalog, "orders", &orders));
    ds.insert("lineitem", chunk(&catalog, "lineitem", &lineitem));
    ds
}
