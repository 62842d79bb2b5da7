use clap::Subcommand;
use mapforge::geometry::{ray_triangle_intersect, Point3, Ray3, Triangle3};
use mapforge::{Error, Result};
use mapforge_oracles::rng::SplitMix64;
use mapforge_oracles::{clipped_normal_mean, convex_iou, monte_carlo_iou, random_case, ray_triangle, PinholeOracle};
use serde_json::json;

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Mean of a normal clipped to [lo, hi], by numerical integration.
    ClippedNormalMean {
        #[arg(long, default_value_t = 3.5)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 2.0)]
        lo: f64,
        #[arg(long, default_value_t = 4.0)]
        hi: f64,
    },
    /// IoU of two polygons given as "x,y x,y ...".
    PolygonIou {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Use Monte Carlo with this many samples instead of convex clipping.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Compare the production ray/triangle kernel against the oracle.
    RayAgreement {
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        #[arg(long = "case-seed", default_value_t = 1)]
        case_seed: u64,
    },
    /// Where a pixel of a camera at height h, tilted down by pitch, meets z = 0.
    GroundProjection {
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 1000.0)]
        focal: f64,
        #[arg(long, default_value_t = 775.0)]
        cx: f64,
        #[arg(long, default_value_t = 1024.0)]
        cy: f64,
        #[arg(long, default_value_t = 1.6)]
        height: f64,
        #[arg(long, default_value_t = 0.5)]
        pitch: f64,
    },
}

fn parse_polygon(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split_whitespace()
        .map(|pt| {
            let (x, y) = pt
                .split_once(',')
                .ok_or_else(|| Error::InvalidParameter(format!("bad vertex {pt:?}")))?;
            let num = |t: &str| t.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number {t:?}")));
            Ok([num(x)?, num(y)?])
        })
        .collect()
}

/// Number of hit/miss disagreements and the largest distance error over
/// `cases` seeded random queries.
pub fn ray_agreement(cases: usize, seed: u64) -> (usize, f64, usize) {
    let mut rng = SplitMix64::new(seed);
    let (mut disagree, mut max_err, mut hits) = (0, 0.0f64, 0);
    for _ in 0..cases {
        let c = random_case(&mut rng);
        let n = (c.direction.iter().map(|d| d * d).sum::<f64>()).sqrt();
        let dir = c.direction.map(|d| d / n);
        let expect = ray_triangle(c.origin, dir, c.tri, 0.0);
        let got = Ray3::new(Point3::from(c.origin), Point3::from(dir))
            .ok()
            .zip(Triangle3::new(c.tri[0].into(), c.tri[1].into(), c.tri[2].into()).ok())
            .and_then(|(r, t)| ray_triangle_intersect(&r, &t));
        match (expect, got) {
            (Some(e), Some(g)) => {
                hits += 1;
                max_err = max_err.max((e.distance - g.distance).abs());
            }
            (None, None) => {}
            _ => disagree += 1,
        }
    }
    (disagree, max_err, hits)
}

pub fn run(cmd: OracleCommand, _json: bool) -> Result<()> {
    let out = match cmd {
        OracleCommand::ClippedNormalMean { mu, sigma, lo, hi } => {
            json!({ "clipped_normal_mean": clipped_normal_mean(mu, sigma, lo, hi) })
        }
        OracleCommand::PolygonIou { a, b, samples } => {
            let (a, b) = (parse_polygon(&a)?, parse_polygon(&b)?);
            match samples {
                None => json!({ "iou": convex_iou(&a, &b) }),
                Some(n) => {
                    let (iou, sigma) = monte_carlo_iou(&a, &b, n, 1);
                    json!({ "iou": iou, "three_sigma": 3.0 * sigma })
                }
            }
        }
        OracleCommand::RayAgreement { cases, case_seed } => {
            let (disagreements, max_distance_error, hits) = ray_agreement(cases, case_seed);
            json!({ "cases": cases, "hits": hits, "disagreements": disagreements, "max_distance_error": max_distance_error })
        }
        OracleCommand::GroundProjection {
            u,
            v,
            focal,
            cx,
            cy,
            height,
            pitch,
        } => {
            // camera looking along +x, tilted down; columns are camera x, y, z in world
            let (sp, cp) = pitch.sin_cos();
            let cam = PinholeOracle {
                fx: focal,
                fy: focal,
                cx,
                cy,
                rotation: [[0.0, -sp, cp], [-1.0, 0.0, 0.0], [0.0, -cp, -sp]],
                center: [0.0, 0.0, height],
            };
            json!({ "ground_point": cam.pixel_to_plane(u, v, 0.0) })
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
