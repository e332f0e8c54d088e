//! On-disk formats for the generated system parameters: `crs.bin` is the
//! public reference string (identifier plus eight elements), `trapdoor.bin`
//! holds the two extraction exponents and stays with the TTP.

use std::fs;
use std::io;
use std::path::Path;

use ark_bls12_381::Bls12_381 as E;

use offline_euro::crs::{Crs, Trapdoor};
use offline_euro::pairing::{scalar_from_bytes, scalar_len, scalar_to_bytes, GroupParams};

pub const CRS_FILE: &str = "crs.bin";
pub const TRAPDOOR_FILE: &str = "trapdoor.bin";

fn bad_data(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn save_params(dir: &Path, crs: &Crs<E>, trapdoor: &Trapdoor<E>) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(CRS_FILE), crs.to_bytes())?;
    let mut td = scalar_to_bytes::<E>(&trapdoor.alpha);
    td.extend_from_slice(&scalar_to_bytes::<E>(&trapdoor.beta));
    fs::write(dir.join(TRAPDOOR_FILE), td)
}

pub fn load_crs(dir: &Path, params: &GroupParams<E>) -> io::Result<Crs<E>> {
    let bytes = fs::read(dir.join(CRS_FILE))?;
    Crs::from_bytes(&bytes, params).map_err(|e| bad_data(&e.to_string()))
}

pub fn load_trapdoor(dir: &Path) -> io::Result<Trapdoor<E>> {
    let bytes = fs::read(dir.join(TRAPDOOR_FILE))?;
    let w = scalar_len::<E>();
    if bytes.len() != 2 * w {
        return Err(bad_data("trapdoor file has the wrong size"));
    }
    Ok(Trapdoor {
        alpha: scalar_from_bytes::<E>(&bytes[..w]).map_err(|e| bad_data(&e.to_string()))?,
        beta: scalar_from_bytes::<E>(&bytes[w..]).map_err(|e| bad_data(&e.to_string()))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_std::rand::SeedableRng;
    use offline_euro::{bls12_381_params, crs};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn params_roundtrip_through_files() {
        let dir = std::env::temp_dir().join(format!("oe-params-{}", std::process::id()));
        let params = bls12_381_params();
        let (crs, trapdoor) = crs::generate(params.clone(), &mut ChaCha20Rng::seed_from_u64(1));
        save_params(&dir, &crs, &trapdoor).unwrap();
        assert_eq!(load_crs(&dir, &params).unwrap(), crs);
        assert_eq!(load_trapdoor(&dir).unwrap(), trapdoor);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
