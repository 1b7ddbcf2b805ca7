//! Artifact files, the hash manifest and the readers used to recompute the
//! summary.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::summary::{parse_opt, IdentityRecord, NodalRecord, RunInfo, Tables};
use super::RunArtifacts;
use crate::concentrate::ConcentrationRow;
use crate::error::{Error, Result};
use crate::measure::DiracApproximationRecord;
use crate::schedule::ScheduleEntry;
use crate::vortex::write_field;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Sorted by path.
    pub files: Vec<ManifestEntry>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.16e}"))
}

const CONCENTRATION_HEADER: &str = "n,r_n,N_n,E_n,E_over_2piN,W1_target,W1_diracs,E_r_theta,decay_c_hat,decay_r2,\
ball_ratio,diameter_ratio,log_h_mean,disk_mass";

fn concentration_csv(rows: &[ConcentrationRow<f64>]) -> String {
    let mut s = String::from(CONCENTRATION_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n,
            r.r,
            r.n_vortices,
            r.energy,
            r.energy_ratio,
            r.w1_target,
            r.w1_diracs,
            r.energy_growth,
            r.decay_c_hat,
            r.decay_r2,
            r.ball_ratio,
            r.diameter_ratio,
            r.log_h_mean,
            r.disk_mass
        );
    }
    s
}

/// Artifact files in write order: `(relative path, contents)`.
fn render(run: &RunArtifacts) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut add = |path: &str, body: String| files.push((path.to_string(), body.into_bytes()));
    add("config.json", run.config.to_json());
    add("measure.json", run.measure.to_json());
    add("run.json", serde_json::to_string_pretty(&run.info()).expect("run info serializes"));
    let records: Vec<DiracApproximationRecord> = run.levels.iter().map(|l| (&l.approx).into()).collect();
    add("approximations.json", serde_json::to_string_pretty(&records).expect("records serialize"));

    let mut schedule = Vec::new();
    run.schedule_report.write_csv(&mut schedule).map_err(|e| Error::io("schedule.csv", e))?;
    add("schedule.csv", String::from_utf8(schedule).expect("ascii"));

    let rows: Vec<ConcentrationRow<f64>> = run.levels.iter().map(|l| l.row).collect();
    add("concentration.csv", concentration_csv(&rows));

    let mut w1 = String::from("n,W1_target,W1_diracs\n");
    for r in &rows {
        let _ = writeln!(w1, "{},{:.16e},{:.16e}", r.n, r.w1_target, r.w1_diracs);
    }
    add("w1.csv", w1);

    let mut ids = String::from("level,name,sup,l2,h,slope\n");
    let mut apriori = String::from("level,r,negative_part,parallel_gradient,transverse_ratio\n");
    let mut nodal = String::from("level,r,N,d_theta_near_zero,d_theta_zeros,empty_level,theta_gap\n");
    for (l, row) in run.levels.iter().zip(&run.nodal) {
        for i in &l.identities {
            let _ = writeln!(
                ids,
                "{},{},{:.16e},{:.16e},{:.16e},{}",
                l.level,
                i.name,
                i.sup_residual,
                i.l2_residual,
                i.spacing,
                opt(i.refinement_slope)
            );
        }
        let a = &l.apriori;
        let _ = writeln!(
            apriori,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            l.level, l.row.r, a.negative_part, a.parallel_gradient, a.transverse_ratio
        );
        let _ = writeln!(
            nodal,
            "{},{:.16e},{},{},{},{},{}",
            l.level,
            row.r,
            row.n_vortices,
            opt(row.to_near_zero),
            opt(row.to_zeros),
            row.empty_level,
            opt(l.theta_gap)
        );
    }
    add("identities.csv", ids);
    add("apriori.csv", apriori);
    add("nodal.csv", nodal);

    if let Some(v) = &run.vanishing {
        let mut s = String::from("level,r,mass\n");
        match v {
            Ok(masses) => {
                for (l, m) in run.levels.iter().zip(masses) {
                    let _ = writeln!(s, "{},{:.16e},{:.16e}", l.level, l.row.r, m);
                }
            }
            Err(e) => {
                let _ = writeln!(s, "error,{}", e.replace(['\n', ','], " "));
            }
        }
        add("vanishing.csv", s);
    }

    for l in &run.levels {
        let mut scan = Vec::new();
        l.scan.write_csv(&mut scan).map_err(|e| Error::io("minima", e))?;
        add(&format!("minima_level{}.csv", l.level), String::from_utf8(scan).expect("ascii"));
        let mut decay = String::from("x,y\n");
        for (x, y) in &l.decay_series {
            let _ = writeln!(decay, "{x:.16e},{y:.16e}");
        }
        add(&format!("decay_level{}.csv", l.level), decay);
        if run.config.report.dump_fields {
            let mut buf = Vec::new();
            write_field(&l.lift.base, &mut buf).map_err(|e| Error::io("field", e))?;
            add(&format!("field_level{}.csv", l.level), String::from_utf8(buf).expect("ascii"));
        }
    }
    add("summary.json", run.summary.to_json());
    Ok(files)
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact into `dir` (created if needed) followed by the
/// manifest, and returns the manifest.
pub fn export(run: &RunArtifacts, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for (name, bytes) in render(run)? {
        let path = dir.join(&name);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestEntry { path: name, bytes: bytes.len() as u64, sha256: digest(&bytes) });
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { files };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(MANIFEST_FILE, e))
}

/// Re-hashes every listed file; any mismatch or missing file is an error.
pub fn verify_manifest(dir: &Path) -> Result<Manifest> {
    let manifest = read_manifest(dir)?;
    for entry in &manifest.files {
        let path = dir.join(&entry.path);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() as u64 != entry.bytes || digest(&bytes) != entry.sha256 {
            return Err(Error::parse(MANIFEST_FILE, format!("{} does not match its recorded hash", entry.path)));
        }
    }
    Ok(manifest)
}

/// Data rows of a CSV file with the expected header, split on commas.
fn csv_rows(path: &Path, header: &str) -> Result<Vec<Vec<String>>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let ctx = path.display().to_string();
    let first = lines.next().transpose().map_err(|e| Error::io(path, e))?.unwrap_or_default();
    if first != header {
        return Err(Error::parse(&ctx, format!("unexpected header {first:?}")));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        out.push(line.split(',').map(str::to_string).collect());
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(row: &[String], k: usize, ctx: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    row.get(k)
        .ok_or_else(|| Error::parse(ctx, format!("missing column {k}")))?
        .parse()
        .map_err(|e| Error::parse(ctx, e))
}

pub(crate) fn read_tables(dir: &Path) -> Result<Tables> {
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let text = fs::read_to_string(path("run.json")).map_err(|e| Error::io(path("run.json"), e))?;
    let info: RunInfo = serde_json::from_str(&text).map_err(|e| Error::parse("run.json", e))?;

    let mut schedule = Vec::new();
    for row in csv_rows(&path("schedule.csv"), "n,N_n,epsilon_n,F_n,r_n,ratio1,ratio2,ratio3,N_rtheta")? {
        let c = "schedule.csv";
        schedule.push(ScheduleEntry {
            n: field(&row, 0, c)?,
            n_vortices: field(&row, 1, c)?,
            epsilon: field(&row, 2, c)?,
            f_value: field(&row, 3, c)?,
            r: field(&row, 4, c)?,
        });
    }

    let mut concentration = Vec::new();
    for row in csv_rows(&path("concentration.csv"), CONCENTRATION_HEADER)? {
        let c = "concentration.csv";
        concentration.push(ConcentrationRow {
            n: field(&row, 0, c)?,
            r: field(&row, 1, c)?,
            n_vortices: field(&row, 2, c)?,
            energy: field(&row, 3, c)?,
            energy_ratio: field(&row, 4, c)?,
            w1_target: field(&row, 5, c)?,
            w1_diracs: field(&row, 6, c)?,
            energy_growth: field(&row, 7, c)?,
            decay_c_hat: field(&row, 8, c)?,
            decay_r2: field(&row, 9, c)?,
            ball_ratio: field(&row, 10, c)?,
            diameter_ratio: field(&row, 11, c)?,
            log_h_mean: field(&row, 12, c)?,
            disk_mass: field(&row, 13, c)?,
        });
    }

    let mut nodal = Vec::new();
    for row in csv_rows(&path("nodal.csv"), "level,r,N,d_theta_near_zero,d_theta_zeros,empty_level,theta_gap")? {
        let c = "nodal.csv";
        let get = |k: usize| row.get(k).map(String::as_str).unwrap_or("");
        nodal.push(NodalRecord {
            level: field(&row, 0, c)?,
            r: field(&row, 1, c)?,
            n_vortices: field(&row, 2, c)?,
            to_near_zero: parse_opt(get(3), c)?,
            to_zeros: parse_opt(get(4), c)?,
            empty_level: field(&row, 5, c)?,
            theta_gap: parse_opt(get(6), c)?,
        });
    }

    let mut identities = Vec::new();
    for row in csv_rows(&path("identities.csv"), "level,name,sup,l2,h,slope")? {
        let c = "identities.csv";
        identities.push(IdentityRecord {
            level: field(&row, 0, c)?,
            name: field(&row, 1, c)?,
            sup: field(&row, 2, c)?,
            l2: field(&row, 3, c)?,
            spacing: field(&row, 4, c)?,
        });
    }

    let mut minima = Vec::new();
    for level in 1..=info.levels_completed {
        for row in csv_rows(&path(&format!("minima_level{level}.csv")), "t,x,y,e^u,class")? {
            minima.push((level, field(&row, 4, "minima")?));
        }
    }

    let vanishing = if info.annulus {
        let rows = csv_rows(&path("vanishing.csv"), "level,r,mass")?;
        Some(match rows.first() {
            Some(r) if r[0] == "error" => Err(r.get(1).cloned().unwrap_or_default()),
            _ => rows.iter().map(|r| field(r, 2, "vanishing.csv")).collect::<Result<Vec<f64>>>().map(Ok)?,
        })
    } else {
        None
    };

    Ok(Tables { info, schedule, concentration, nodal, identities, minima, vanishing })
}
