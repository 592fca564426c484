//! Subcommand implementations.
//!
//! Every runner follows the same shape: resolve knobs (flag, then the
//! `[subcommand]` config section, then a built-in default), wrap the
//! expensive step in the result cache as a JSON document, and write all
//! artifacts *from that document*. The single rebuild path means a cache
//! hit and a fresh run emit byte-identical files, which is what the
//! determinism contract promises.

use std::fs;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use toruslab::building::{
    algebra_disc_exp, canonical_norm, delta_distance, lambda_order, local_torus_data,
    padic_local_integral, random_split_datum, unit_density,
};
use toruslab::charsum::{class_character_sum, trivial_character};
use toruslab::classes::{enumerate_coarse_classes, picard_group};
use toruslab::equidist::{hecke_unfolding_check, weyl_average, WeylRow};
use toruslab::exec::Strategy;
use toruslab::latimer::{integral_points_in_window, packets};
use toruslab::numfield::NumField;
use toruslab::orbit::{orbit_of, real_embedding, sample_orbit, SampleScheme};
use toruslab::order::maximal_order;
use toruslab::padic::factor_u64;
use toruslab::poly::MonicIntPoly;
use toruslab::reduce::unit_group;
use toruslab::report::{
    lattice_string, write_building_csv, write_json, write_sample_stream, write_weyl_csv,
    write_xy_csv, BuildingRow,
};
use toruslab::rng::{domains, sample_rng};
use toruslab::testfn::TestFunction;
use toruslab::zeta::{cnf_check, volume_disc_trend, zeta_partial};
use toruslab::zmat::QMat;
use toruslab::{Error, Result};

use crate::cache::{canonical, sha256_hex, Cache, CacheStatus};
use crate::config::Config;

pub struct Ctx {
    pub out: PathBuf,
    pub cfg: Config,
    pub cache: Cache,
    pub strategy: Strategy,
}

/// Run id used for artifact names: subcommand plus a content hash of the
/// resolved input, so distinct invocations never clobber each other.
fn run_id(input: &Value) -> String {
    let cmd = input["cmd"].as_str().unwrap_or("run");
    let h = sha256_hex(canonical(input).as_bytes());
    format!("{cmd}-{}", &h[..12])
}

/// Record every artifact (name, size, SHA-256) in `<id>.manifest.json`.
fn write_manifest(
    ctx: &Ctx,
    id: &str,
    input: &Value,
    status: CacheStatus,
    artifacts: &[PathBuf],
) -> Result<()> {
    let mut rows = Vec::new();
    for p in artifacts {
        let bytes = fs::read(p)?;
        rows.push(json!({
            "file": p.file_name().and_then(|s| s.to_str()).unwrap_or_default(),
            "bytes": bytes.len(),
            "sha256": sha256_hex(&bytes),
        }));
        println!("wrote {}", p.display());
    }
    let doc = json!({
        "run": id,
        "input": input,
        "cache": status.as_str(),
        "artifacts": rows,
    });
    let path = ctx.out.join(format!("{id}.manifest.json"));
    write_json(&path, &doc)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn jf(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn jvec(v: &Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().map(jf).collect()).unwrap_or_default()
}

fn jarr(v: &Value) -> &[Value] {
    v.as_array().map(Vec::as_slice).unwrap_or(&[])
}

fn jstr(v: &Value) -> &str {
    v.as_str().unwrap_or_default()
}

// ---------------------------------------------------------------- disc ----

pub fn run_disc(ctx: &Ctx, poly: Option<String>) -> Result<i32> {
    let ps = ctx.cfg.require(poly, "disc", "poly")?;
    let poly: MonicIntPoly = ps.parse()?;
    let input = json!({"cmd": "disc", "poly": poly.to_string()});
    let (result, status) = ctx.cache.get_or(&input, || {
        let (r1, r2) = poly.signature()?;
        Ok(json!({
            "poly": poly.to_string(),
            "degree": poly.degree(),
            "disc": poly.disc().to_string(),
            "r1": r1,
            "r2": r2,
        }))
    })?;
    let id = run_id(&input);
    let path = ctx.out.join(format!("{id}.json"));
    write_json(&path, &result)?;
    println!(
        "disc({}) = {}, signature ({}, {})",
        jstr(&result["poly"]),
        jstr(&result["disc"]),
        result["r1"],
        result["r2"]
    );
    write_manifest(ctx, &id, &input, status, &[path])?;
    Ok(0)
}

// ------------------------------------------------------------- classes ----

pub fn run_classes(ctx: &Ctx, poly: Option<String>) -> Result<i32> {
    let ps = ctx.cfg.require(poly, "classes", "poly")?;
    let field = NumField::new(ps.parse()?)?;
    let polys = field.poly.to_string();
    let input = json!({"cmd": "classes", "poly": polys});
    let (result, status) = ctx.cache.get_or(&input, || {
        let pks = packets(&field)?;
        let rows: Vec<Value> = pks
            .iter()
            .enumerate()
            .map(|(pid, pk)| {
                json!({
                    "packet": pid,
                    "disc": pk.disc.to_string(),
                    "classes": pk.classes.iter().map(lattice_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        Ok(json!({"poly": polys, "packets": rows}))
    })?;

    let id = run_id(&input);
    let csv_path = ctx.out.join(format!("{id}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["poly", "order_disc", "packet_id", "class_id", "class_hnf"])?;
    let mut total = 0usize;
    for pk in jarr(&result["packets"]) {
        let pid = pk["packet"].to_string();
        for (cid, cls) in jarr(&pk["classes"]).iter().enumerate() {
            let cid = cid.to_string();
            w.write_record([polys.as_str(), jstr(&pk["disc"]), &pid, &cid, jstr(cls)])?;
            total += 1;
        }
    }
    w.flush()?;
    drop(w);
    println!("{} packet(s), {} class(es)", jarr(&result["packets"]).len(), total);
    write_manifest(ctx, &id, &input, status, &[csv_path])?;
    Ok(0)
}

// ------------------------------------------------------------- packets ----

pub fn run_packets(ctx: &Ctx, poly: Option<String>) -> Result<i32> {
    let ps = ctx.cfg.require(poly, "packets", "poly")?;
    let field = NumField::new(ps.parse()?)?;
    let polys = field.poly.to_string();
    let input = json!({"cmd": "packets", "poly": polys});
    let (result, status) = ctx.cache.get_or(&input, || {
        let pks = packets(&field)?;
        let mut rows = Vec::new();
        for (pid, pk) in pks.iter().enumerate() {
            let ug = unit_group(&pk.order)?;
            rows.push(json!({
                "packet": pid,
                "disc": pk.disc.to_string(),
                "classes": pk.classes.len(),
                "regulator": ug.regulator,
                "torsion": ug.torsion,
                "volume": pk.classes.len() as f64 * ug.regulator,
            }));
        }
        Ok(json!({"poly": polys, "rows": rows}))
    })?;

    let id = run_id(&input);
    let csv_path = ctx.out.join(format!("{id}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["poly", "order_disc", "packet_id", "classes", "regulator", "torsion", "volume"])?;
    for r in jarr(&result["rows"]) {
        let cells = [
            polys.clone(),
            jstr(&r["disc"]).to_string(),
            r["packet"].to_string(),
            r["classes"].to_string(),
            jf(&r["regulator"]).to_string(),
            r["torsion"].to_string(),
            jf(&r["volume"]).to_string(),
        ];
        w.write_record(&cells)?;
    }
    w.flush()?;
    drop(w);
    println!("{} packet(s)", jarr(&result["rows"]).len());
    write_manifest(ctx, &id, &input, status, &[csv_path])?;
    Ok(0)
}

// ------------------------------------------------------------ equidist ----

pub struct EquidistArgs {
    pub family: Option<String>,
    pub kmax: Option<u64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub grid: bool,
    pub cloud: bool,
}

/// x^2 - k (k not a square) or x^3 - kx - 1 (k >= 3), both totally real.
fn family_polys(family: &str, kmax: u64) -> Result<Vec<MonicIntPoly>> {
    let mut out = Vec::new();
    match family {
        "quadratic" => {
            for k in 2..=kmax {
                let r = (k as f64).sqrt().round() as u64;
                if r * r == k {
                    continue;
                }
                out.push(format!("x^2 - {k}").parse()?);
            }
        }
        "cubic" => {
            for k in 3..=kmax {
                out.push(format!("x^3 - {k}x - 1").parse()?);
            }
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown family '{other}' (expected quadratic or cubic)"
            )))
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty family: raise kmax"));
    }
    Ok(out)
}

/// Fixed six-function suite: four Gaussian widths bracketing 1 and two
/// radial bumps, all with closed-form means.
fn default_suite(n: usize) -> Vec<TestFunction> {
    vec![
        TestFunction::gaussian(0.8),
        TestFunction::gaussian(1.0),
        TestFunction::gaussian(1.25),
        TestFunction::gaussian(1.6),
        TestFunction::bump(vec![0.0; n], 1.0),
        TestFunction::bump(vec![0.0; n], 1.5),
    ]
}

fn weyl_row_json(r: &WeylRow) -> Value {
    json!({
        "poly": r.poly,
        "disc": r.disc.to_string(),
        "volume": r.volume,
        "orbits": r.orbits,
        "samples": r.samples,
        "averages": r.averages,
        "rhs": r.rhs,
        "deviations": r.deviations,
        "stderr": r.stderr,
    })
}

fn weyl_row_from_json(v: &Value) -> Result<WeylRow> {
    let disc: BigInt = jstr(&v["disc"])
        .parse()
        .map_err(|_| Error::invalid("bad disc in cached row"))?;
    Ok(WeylRow {
        poly: jstr(&v["poly"]).to_string(),
        disc,
        volume: jf(&v["volume"]),
        orbits: v["orbits"].as_u64().unwrap_or(0) as usize,
        samples: v["samples"].as_u64().unwrap_or(0) as usize,
        averages: jvec(&v["averages"]),
        rhs: jvec(&v["rhs"]),
        deviations: jvec(&v["deviations"]),
        stderr: jvec(&v["stderr"]),
    })
}

pub fn run_equidist(ctx: &Ctx, a: EquidistArgs) -> Result<i32> {
    let family = ctx.cfg.resolve(a.family, "equidist", "family", "quadratic".to_string())?;
    let kmax = ctx.cfg.resolve(a.kmax, "equidist", "kmax", 60u64)?;
    let samples = ctx.cfg.resolve(a.samples, "equidist", "samples", 128usize)?;
    let seed = ctx.cfg.resolve(a.seed, "equidist", "seed", 7u64)?;
    let polys = family_polys(&family, kmax)?;
    let scheme = if a.grid {
        SampleScheme::Grid(samples)
    } else {
        SampleScheme::MonteCarlo { m: samples, seed }
    };
    let scheme_tag = if a.grid { "grid" } else { "mc" };

    let input = json!({
        "cmd": "equidist",
        "family": family,
        "kmax": kmax,
        "samples": samples,
        "seed": seed,
        "scheme": scheme_tag,
        "suite": "gaussian 0.8/1.0/1.25/1.6 + bump 1.0/1.5",
    });
    let (result, status) = ctx.cache.get_or(&input, || {
        let mut rows = Vec::new();
        for poly in &polys {
            let field = NumField::new(poly.clone())?;
            let emb = real_embedding(&field.poly)?;
            let suite = default_suite(field.n);
            for pk in packets(&field)? {
                let row = weyl_average(&field, &emb, &pk, &suite, scheme, ctx.strategy)?;
                rows.push(weyl_row_json(&row));
            }
        }
        Ok(json!({"rows": rows}))
    })?;

    let rows: Vec<WeylRow> = jarr(&result["rows"])
        .iter()
        .map(weyl_row_from_json)
        .collect::<Result<_>>()?;
    let id = run_id(&input);
    let csv_path = ctx.out.join(format!("{id}.csv"));
    write_weyl_csv(&csv_path, &rows)?;
    let mut artifacts = vec![csv_path];

    if a.cloud {
        // Dump the sample cloud of the first class of the last (largest
        // disc) family member; sampling is deterministic, so no cache.
        let poly = polys.last().expect("family is nonempty");
        let field = NumField::new(poly.clone())?;
        let emb = real_embedding(&field.poly)?;
        let pks = packets(&field)?;
        let pk = pks
            .first()
            .ok_or_else(|| Error::invalid("family member has no packets"))?;
        let orbit = orbit_of(&field, &emb, &pk.classes[0])?;
        let pts = sample_orbit(&orbit, scheme, ctx.strategy)?;
        let n = field.n;
        let mut data = Vec::with_capacity(pts.len() * n * n);
        for p in &pts {
            for row in &p.basis {
                data.extend_from_slice(row);
            }
        }
        let extra = json!({
            "poly": field.poly.to_string(),
            "orbit": 0,
            "seed": seed,
            "scheme": scheme_tag,
        });
        let (bin, side) = write_sample_stream(&ctx.out, &format!("{id}.cloud"), n * n, &data, extra)?;
        artifacts.push(bin);
        artifacts.push(side);
    }

    let worst = rows
        .iter()
        .flat_map(|r| r.deviations.iter().map(|d| d.abs()))
        .fold(0.0f64, f64::max);
    println!("{} packet row(s); max |deviation| = {worst:.4}", rows.len());
    write_manifest(ctx, &id, &input, status, &artifacts)?;
    Ok(0)
}

// --------------------------------------------------------------- hecke ----

pub fn run_hecke(
    ctx: &Ctx,
    poly: Option<String>,
    count: Option<usize>,
    sigma: Option<f64>,
) -> Result<i32> {
    let ps = ctx.cfg.require(poly, "hecke", "poly")?;
    let field = NumField::new(ps.parse()?)?;
    let polys = field.poly.to_string();
    let count = ctx.cfg.resolve(count, "hecke", "count", 6usize)?;
    let sigma = ctx.cfg.resolve(sigma, "hecke", "sigma", 1.0f64)?;
    let input = json!({"cmd": "hecke", "poly": polys, "count": count, "sigma": sigma});
    let (result, status) = ctx.cache.get_or(&input, || {
        let emb = real_embedding(&field.poly)?;
        let cls = enumerate_coarse_classes(&field)?;
        let mut rows = Vec::new();
        for (i, lat) in cls.iter().take(count).enumerate() {
            let hc = hecke_unfolding_check(&field, &emb, lat, sigma)?;
            rows.push(json!({
                "class": i,
                "lhs": hc.lhs,
                "rhs": hc.rhs,
                "relerr": hc.relerr,
                "reps": hc.reps,
            }));
        }
        Ok(json!({"poly": polys, "sigma": sigma, "rows": rows}))
    })?;

    let id = run_id(&input);
    let path = ctx.out.join(format!("{id}.json"));
    write_json(&path, &result)?;
    let worst = jarr(&result["rows"])
        .iter()
        .map(|r| jf(&r["relerr"]))
        .fold(0.0f64, f64::max);
    println!("{} class(es); worst relerr = {worst:.3e}", jarr(&result["rows"]).len());
    write_manifest(ctx, &id, &input, status, &[path])?;
    Ok(0)
}

// ------------------------------------------------------------ building ----

pub struct BuildingArgs {
    pub prime: Option<u64>,
    pub poly: Option<String>,
    pub conjugate: Option<String>,
    pub count: Option<usize>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub rmax: Option<i64>,
}

fn qmat_string(m: &QMat) -> String {
    (0..m.nrows)
        .map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_qmat(s: &str, n: usize) -> Result<QMat> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != n {
        return Err(Error::invalid(format!(
            "conjugator needs {n} ';'-separated rows, got {}",
            rows.len()
        )));
    }
    let mut m = QMat::zero(n, n);
    for (i, r) in rows.iter().enumerate() {
        let es: Vec<&str> = r.split(',').collect();
        if es.len() != n {
            return Err(Error::invalid(format!(
                "conjugator row {} needs {n} entries, got {}",
                i + 1,
                es.len()
            )));
        }
        for (j, e) in es.iter().enumerate() {
            *m.at_mut(i, j) = e
                .trim()
                .parse::<BigRational>()
                .map_err(|_| Error::invalid(format!("bad rational entry '{}'", e.trim())))?;
        }
    }
    Ok(m)
}

pub fn run_building(ctx: &Ctx, a: BuildingArgs) -> Result<i32> {
    let p = ctx.cfg.resolve(a.prime, "building", "prime", 7u64)?;
    let rmax = ctx.cfg.resolve(a.rmax, "building", "rmax", 5i64)?.max(0);

    // (poly string, conjugator string, matrix) to analyze.
    let mut specs: Vec<(String, String, QMat)> = Vec::new();
    let poly_opt = match a.poly {
        Some(v) => Some(v),
        None => ctx.cfg.get("building", "poly").map(String::from),
    };
    let input;
    if let Some(ps) = poly_opt {
        let poly: MonicIntPoly = ps.parse()?;
        let n = poly.degree();
        let conj_s = ctx.cfg.resolve(a.conjugate, "building", "conjugate", String::new())?;
        let g = if conj_s.is_empty() { QMat::identity(n) } else { parse_qmat(&conj_s, n)? };
        let gi = g.inverse().ok_or_else(|| Error::invalid("conjugator is singular"))?;
        let m = g.mul(&QMat::from_zmat(&poly.companion())).mul(&gi);
        let conj_norm = qmat_string(&g);
        input = json!({
            "cmd": "building",
            "prime": p,
            "mode": "single",
            "poly": poly.to_string(),
            "conjugate": conj_norm,
            "rmax": rmax,
        });
        specs.push((poly.to_string(), conj_norm, m));
    } else {
        let count = ctx.cfg.resolve(a.count, "building", "count", 8usize)?;
        let dim = ctx.cfg.resolve(a.dim, "building", "dim", 2usize)?;
        let seed = ctx.cfg.resolve(a.seed, "building", "seed", 7u64)?;
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid("dim must be 2 or 3"));
        }
        input = json!({
            "cmd": "building",
            "prime": p,
            "mode": "random",
            "count": count,
            "dim": dim,
            "seed": seed,
            "rmax": rmax,
        });
        for i in 0..count {
            let mut rng = sample_rng(seed, domains::LOCAL_DATA, i as u64);
            let d = random_split_datum(p, dim, &mut rng)?;
            specs.push((d.data.poly.to_string(), qmat_string(&d.conj), d.data.mat.clone()));
        }
    }

    let (result, status) = ctx.cache.get_or(&input, || {
        let mut rows = Vec::new();
        for (polys, conjs, m) in &specs {
            let data = local_torus_data(p, m.clone())?;
            let lam = lambda_order(&data)?;
            let a_exp = algebra_disc_exp(&data)?;
            let ud = unit_density(&data)?;
            let cn = canonical_norm(&data)?;
            let delta = if cn.split { delta_distance(&data)? } else { f64::NAN };
            let n = data.poly.degree();
            let ivals: Vec<f64> = (0..=rmax)
                .map(|r| {
                    let mut t = vec![0i64; n];
                    t[0] = r;
                    padic_local_integral(p, n, &t)
                })
                .collect();
            rows.push(json!({
                "p": p,
                "poly": polys,
                "conjugator": conjs,
                "disc_d": lam.disc_d(),
                "disc_a": (p as f64).powi(a_exp as i32),
                "delta": delta, // NaN serializes as null (non-split datum)
                "unit_density": ud.density,
                "i_values": ivals,
            }));
        }
        Ok(json!({"rows": rows}))
    })?;

    let rows: Vec<BuildingRow> = jarr(&result["rows"])
        .iter()
        .map(|r| BuildingRow {
            p: r["p"].as_u64().unwrap_or(p),
            poly: jstr(&r["poly"]).to_string(),
            conjugator: jstr(&r["conjugator"]).to_string(),
            disc_d: jf(&r["disc_d"]),
            disc_a: jf(&r["disc_a"]),
            delta: jf(&r["delta"]),
            unit_density: jf(&r["unit_density"]),
            i_values: jvec(&r["i_values"]),
        })
        .collect();
    let id = run_id(&input);
    let csv_path = ctx.out.join(format!("{id}.csv"));
    write_building_csv(&csv_path, &rows)?;
    println!("{} local datum row(s) at p = {p}", rows.len());
    write_manifest(ctx, &id, &input, status, &[csv_path])?;
    Ok(0)
}

// ---------------------------------------------------------------- zeta ----

pub fn run_zeta(
    ctx: &Ctx,
    poly: Option<String>,
    bound: Option<u64>,
    s: Option<f64>,
    delta: Option<f64>,
) -> Result<i32> {
    let ps = ctx.cfg.require(poly, "zeta", "poly")?;
    let field = NumField::new(ps.parse()?)?;
    let polys = field.poly.to_string();
    let bound = ctx.cfg.resolve(bound, "zeta", "bound", 20_000u64)?;
    if s.is_some_and(|sv| sv <= 1.0) {
        return Err(Error::invalid("partial zeta values need s > 1"));
    }
    let input = json!({"cmd": "zeta", "poly": polys, "bound": bound, "s": s, "delta": delta});
    let (result, status) = ctx.cache.get_or(&input, || {
        let cnf = cnf_check(&field, bound)?;
        let mut doc = json!({
            "poly": polys,
            "bound": bound,
            "residue": cnf.residue,
            "rhs": cnf.rhs,
            "relerr": cnf.relerr,
            "counts": [cnf.counts.0, cnf.counts.1],
        });
        if let Some(sv) = s {
            let ord = maximal_order(&field)?;
            doc["partial"] = json!({"s": sv, "value": zeta_partial(&ord, sv, bound)?});
        }
        if let Some(dv) = delta {
            let ord = maximal_order(&field)?;
            let pic = picard_group(&ord)?;
            let triv = trivial_character(&pic);
            let mut sums = Vec::new();
            for chi in 0..pic.order() {
                if chi == triv {
                    continue;
                }
                let z = class_character_sum(&ord, &pic, chi, dv)?;
                sums.push(json!({"character": chi, "abs": z.norm(), "re": z.re, "im": z.im}));
            }
            doc["charsum"] = json!({"delta": dv, "classes": pic.order(), "sums": sums});
        }
        Ok(doc)
    })?;

    let id = run_id(&input);
    let path = ctx.out.join(format!("{id}.json"));
    write_json(&path, &result)?;
    println!(
        "residue estimate {:.6} vs rhs {:.6} (relerr {:.2e})",
        jf(&result["residue"]),
        jf(&result["rhs"]),
        jf(&result["relerr"])
    );
    write_manifest(ctx, &id, &input, status, &[path])?;
    Ok(0)
}

// ---------------------------------------------------------- cube-roots ----

pub fn run_cube_roots(
    ctx: &Ctx,
    poly: Option<String>,
    window: Option<f64>,
    cap: Option<usize>,
) -> Result<i32> {
    let ps = ctx.cfg.resolve(poly, "cube-roots", "poly", "x^3 - 2".to_string())?;
    let field = NumField::new(ps.parse()?)?;
    let polys = field.poly.to_string();
    let w = ctx.cfg.resolve(window, "cube-roots", "window", 2.0f64)?;
    let cap = ctx.cfg.resolve(cap, "cube-roots", "cap", 200usize)?;
    if !(w > 0.0) {
        return Err(Error::invalid("window half-width must be positive"));
    }
    let input = json!({"cmd": "cube-roots", "poly": polys, "window": w, "cap": cap});
    let (result, status) = ctx.cache.get_or(&input, || {
        let n = field.n;
        let census = integral_points_in_window(&field, &vec![(-w, w); n * n], cap)?;
        let dilated = integral_points_in_window(&field, &vec![(-2.0 * w, 2.0 * w); n * n], cap)?;
        let pts: Vec<Value> = census
            .points
            .iter()
            .map(|m| {
                let rows: Vec<Vec<String>> = (0..n)
                    .map(|i| (0..n).map(|j| m.at(i, j).to_string()).collect())
                    .collect();
                json!(rows)
            })
            .collect();
        Ok(json!({
            "poly": polys,
            "window": w,
            "cap": cap,
            "count": census.points.len(),
            "complete": census.complete,
            "dilated_count": dilated.points.len(),
            "dilated_complete": dilated.complete,
            "points": pts,
        }))
    })?;

    let id = run_id(&input);
    let path = ctx.out.join(format!("{id}.json"));
    write_json(&path, &result)?;
    let complete = result["complete"].as_bool().unwrap_or(false);
    let dilated_complete = result["dilated_complete"].as_bool().unwrap_or(false);
    println!(
        "census: {} point(s) (complete: {complete}); 2x window: {} (complete: {dilated_complete})",
        result["count"], result["dilated_count"]
    );
    write_manifest(ctx, &id, &input, status, &[path])?;
    if complete && dilated_complete {
        Ok(0)
    } else {
        eprintln!("census truncated at cap = {cap}; exit 3");
        Ok(3)
    }
}

// -------------------------------------------------------------- report ----

pub struct ReportArgs {
    pub family: Option<String>,
    pub kmax: Option<u64>,
    pub seed: Option<u64>,
    pub charsum: bool,
    pub delta: Option<f64>,
}

pub fn run_report(ctx: &Ctx, a: ReportArgs) -> Result<i32> {
    let seed = ctx.cfg.resolve(a.seed, "report", "seed", 7u64)?;
    if a.charsum {
        return run_report_charsum(ctx, a, seed);
    }
    let family = ctx.cfg.resolve(a.family, "report", "family", "quadratic".to_string())?;
    let kdef = if family == "cubic" { 40u64 } else { 400u64 };
    let kmax = ctx.cfg.resolve(a.kmax, "report", "kmax", kdef)?;
    let input =
        json!({"cmd": "report", "mode": "trend", "family": family, "kmax": kmax, "seed": seed});
    let (result, status) = ctx.cache.get_or(&input, || {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for poly in family_polys(&family, kmax)? {
            if family == "cubic" {
                // Keep the squarefree-discriminant subset, where the
                // equation order is maximal and packets are comparable.
                let d = poly.disc().magnitude().to_u64();
                match d {
                    Some(d) if factor_u64(d).iter().all(|&(_, e)| e == 1) => {}
                    _ => continue,
                }
            }
            let field = NumField::new(poly)?;
            for pk in packets(&field)? {
                let ug = unit_group(&pk.order)?;
                let disc = pk.disc.to_f64().unwrap_or(f64::NAN);
                pts.push((disc, pk.classes.len() as f64 * ug.regulator));
            }
        }
        let fit = volume_disc_trend(&pts, seed)?;
        Ok(json!({
            "family": family,
            "kmax": kmax,
            "points": pts.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "lo": fit.lo,
            "hi": fit.hi,
            "used": fit.points,
        }))
    })?;

    let pts: Vec<(f64, f64)> = jarr(&result["points"])
        .iter()
        .map(|p| (jf(&p[0]), jf(&p[1])))
        .collect();
    let id = run_id(&input);
    let csv_path = ctx.out.join(format!("{id}.csv"));
    write_xy_csv(&csv_path, "disc", "volume", &pts)?;
    let json_path = ctx.out.join(format!("{id}.json"));
    write_json(&json_path, &result)?;
    println!(
        "volume ~ disc^s: s = {:.4}, 95% interval [{:.4}, {:.4}] from {} packet(s)",
        jf(&result["slope"]),
        jf(&result["lo"]),
        jf(&result["hi"]),
        result["used"]
    );
    write_manifest(ctx, &id, &input, status, &[csv_path, json_path])?;
    Ok(0)
}

/// Character-sum decay table over imaginary quadratic orders with class
/// number at least 2: worst nontrivial |sum| against |disc|, informational.
fn run_report_charsum(ctx: &Ctx, a: ReportArgs, seed: u64) -> Result<i32> {
    let kmax = ctx.cfg.resolve(a.kmax, "report", "kmax", 80u64)?;
    let delta = ctx.cfg.resolve(a.delta, "report", "delta", 1.0f64)?;
    let input =
        json!({"cmd": "report", "mode": "charsum", "kmax": kmax, "delta": delta, "seed": seed});
    let (result, status) = ctx.cache.get_or(&input, || {
        let mut rows = Vec::new();
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for m in 2..=kmax {
            if !factor_u64(m).iter().all(|&(_, e)| e == 1) {
                continue;
            }
            let field = NumField::new(format!("x^2 + {m}").parse()?)?;
            let ord = maximal_order(&field)?;
            let pic = picard_group(&ord)?;
            if pic.order() < 2 {
                continue;
            }
            let triv = trivial_character(&pic);
            let mut worst = 0.0f64;
            for chi in 0..pic.order() {
                if chi == triv {
                    continue;
                }
                worst = worst.max(class_character_sum(&ord, &pic, chi, delta)?.norm());
            }
            let disc = ord.disc().magnitude().to_f64().unwrap_or(f64::NAN);
            rows.push(json!({"m": m, "disc": disc, "classes": pic.order(), "max_abs": worst}));
            pts.push((disc, worst));
        }
        // The decay fit is informational; tiny families simply skip it.
        let fit = toruslab::fit::loglog_fit(&pts, seed).ok();
        Ok(json!({
            "delta": delta,
            "rows": rows,
            "points": pts.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
            "slope": fit.as_ref().map(|f| f.slope),
            "lo": fit.as_ref().map(|f| f.lo),
            "hi": fit.as_ref().map(|f| f.hi),
        }))
    })?;

    let pts: Vec<(f64, f64)> = jarr(&result["points"])
        .iter()
        .map(|p| (jf(&p[0]), jf(&p[1])))
        .collect();
    let id = run_id(&input);
    let csv_path = ctx.out.join(format!("{id}.csv"));
    write_xy_csv(&csv_path, "disc", "max_abs_charsum", &pts)?;
    let json_path = ctx.out.join(format!("{id}.json"));
    write_json(&json_path, &result)?;
    match result["slope"].as_f64() {
        Some(s) => println!("worst |charsum| ~ disc^s: s = {s:.4} over {} order(s)", pts.len()),
        None => println!("worst |charsum| table over {} order(s); no fit", pts.len()),
    }
    write_manifest(ctx, &id, &input, status, &[csv_path, json_path])?;
    Ok(0)
}
