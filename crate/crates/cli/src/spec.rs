//! Parsing of state and observable specs: named presets, inline JSON, or
//! `@file` references. Matrices are dense complex JSON arrays of `[re, im]`
//! pairs, row by row.

use binary_qm_core::{
    algebra, bell, Complex64, ComplexMatrix, ComplexVector, Observable, QuantumState,
    SpinDirection, Tolerances,
};

use crate::CliError;

pub const STATE_PRESETS: &[&str] = &["singlet", "mixed_qubit", "up_z", "down_z", "plus_x"];
pub const OBSERVABLE_PRESETS: &[&str] = &[
    "pauli_x", "pauli_y", "pauli_z", "identity", "sz_a", "sz_b", "sx_a", "sx_b",
];

fn load(input: &str) -> Result<String, CliError> {
    if let Some(path) = input.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read spec file `{path}`: {e}")))
    } else {
        Ok(input.to_string())
    }
}

fn parse_matrix_json(text: &str) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!(
            "matrix parse error at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let complex_rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&complex_rows).map_err(|e| CliError::Input(e.to_string()))
}

pub fn parse_state(input: &str, tol: &Tolerances) -> Result<QuantumState, CliError> {
    match input {
        "singlet" => return Ok(bell::singlet_state()),
        "mixed_qubit" => return Ok(QuantumState::maximally_mixed(2)),
        "up_z" => {
            return QuantumState::new(ComplexMatrix::from_real_diag(&[1.0, 0.0]), tol)
                .map_err(CliError::from)
        }
        "down_z" => {
            return QuantumState::new(ComplexMatrix::from_real_diag(&[0.0, 1.0]), tol)
                .map_err(CliError::from)
        }
        "plus_x" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            return QuantumState::pure(&ComplexVector::from_real(&[s, s]), tol)
                .map_err(CliError::from);
        }
        other if !other.starts_with('@') && !other.trim_start().starts_with('[') => {
            return Err(CliError::Input(format!(
                "unknown state preset `{other}`; known presets: {}",
                STATE_PRESETS.join(", ")
            )));
        }
        _ => {}
    }
    let text = load(input)?;
    let matrix = parse_matrix_json(&text)?;
    QuantumState::new(matrix, tol).map_err(CliError::from)
}

pub fn parse_observable(input: &str, tol: &Tolerances) -> Result<Observable, CliError> {
    match input {
        "pauli_x" => return Ok(algebra::pauli_x()),
        "pauli_y" => return Ok(algebra::pauli_y()),
        "pauli_z" => return Ok(algebra::pauli_z()),
        "identity" => return Ok(Observable::identity(2)),
        "sz_a" => {
            return Ok(bell::spin_observable(
                &SpinDirection::z_axis(),
                bell::Particle::A,
            ))
        }
        "sz_b" => {
            return Ok(bell::spin_observable(
                &SpinDirection::z_axis(),
                bell::Particle::B,
            ))
        }
        "sx_a" => {
            return Ok(bell::spin_observable(
                &SpinDirection::x_axis(),
                bell::Particle::A,
            ))
        }
        "sx_b" => {
            return Ok(bell::spin_observable(
                &SpinDirection::x_axis(),
                bell::Particle::B,
            ))
        }
        other if !other.starts_with('@') && !other.trim_start().starts_with('[') => {
            return Err(CliError::Input(format!(
                "unknown observable preset `{other}`; known presets: {}",
                OBSERVABLE_PRESETS.join(", ")
            )));
        }
        _ => {}
    }
    let text = load(input)?;
    let matrix = parse_matrix_json(&text)?;
    Observable::new(matrix, tol).map_err(CliError::from)
}

/// `START:END:STEP` in degrees, inclusive of END when it lands on the grid.
pub fn parse_grid(input: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = input.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "grid `{input}` must be START:END:STEP in degrees"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| CliError::Input(format!("grid value `{p}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || end < start {
        return Err(CliError::Input(format!(
            "grid `{input}` must have positive step and END ≥ START"
        )));
    }
    let mut thetas = Vec::new();
    let mut k = 0u32;
    loop {
        let theta = start + f64::from(k) * step;
        if theta > end + 1e-9 {
            break;
        }
        thetas.push(theta);
        k += 1;
    }
    Ok(thetas)
}

/// Four comma-separated planar angles in degrees: a, a', b, b'.
pub fn parse_angles(input: &str) -> Result<[f64; 4], CliError> {
    let nums: Vec<f64> = input
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Input(format!("angle `{p}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    nums.try_into()
        .map_err(|_| CliError::Input(format!("`{input}` must list exactly four angles")))
}

/// Comma-separated dimensions, each in 1..=16.
pub fn parse_dims(input: &str) -> Result<Vec<usize>, CliError> {
    let dims: Vec<usize> = input
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Input(format!("dimension `{p}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    for &d in &dims {
        if d == 0 || d > 16 {
            return Err(CliError::Input(format!("dimension {d} outside 1..=16")));
        }
    }
    if dims.is_empty() {
        return Err(CliError::Input("no dimensions given".into()));
    }
    Ok(dims)
}

pub fn parse_tolerances(overrides: &[String]) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::DEFAULT;
    for entry in overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("tolerance `{entry}` must be KEY=VAL")))?;
        let value: f64 = value
            .parse()
            .map_err(|e| CliError::Input(format!("tolerance value `{value}`: {e}")))?;
        tol.set(key.trim(), value).map_err(CliError::Input)?;
    }
    Ok(tol)
}
