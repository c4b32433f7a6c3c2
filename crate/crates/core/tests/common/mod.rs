#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use zeta_ladder::ladder::{calibrate_c0, default_anchors, Ladder, LadderConfig, PrimePiTable};
use zeta_ladder::quadrature::{QuadConfig, SecondMoment};
use zeta_ladder::special_fn::RSConfig;

pub fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("zlcache")
}

/// Process-wide second-moment table, persisted between test binaries.
pub fn moment() -> Arc<SecondMoment> {
    static SM: OnceLock<Arc<SecondMoment>> = OnceLock::new();
    SM.get_or_init(|| {
        Arc::new(
            SecondMoment::with_cache_dir(QuadConfig::default(), RSConfig::default(), &cache_dir())
                .expect("second moment table"),
        )
    })
    .clone()
}

pub fn primes() -> &'static PrimePiTable {
    static P: OnceLock<PrimePiTable> = OnceLock::new();
    P.get_or_init(|| PrimePiTable::new(2_000_000))
}

/// Ladder with c₀ calibrated on the default anchors.
pub fn calibrated_ladder() -> Ladder {
    static L: OnceLock<Ladder> = OnceLock::new();
    L.get_or_init(|| {
        let mut cfg = LadderConfig::default();
        calibrate_c0(&default_anchors(), &mut cfg, &moment(), primes()).expect("calibration");
        Ladder::new(cfg, moment()).expect("ladder")
    })
    .clone()
}
