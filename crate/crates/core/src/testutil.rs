use crate::waveform::{Constellation, SensePattern, WaveformConfig};

pub(crate) fn small_config(m: usize, group: usize, active: usize, c: Constellation) -> WaveformConfig {
    WaveformConfig {
        subcarriers: m,
        group_size: group,
        active,
        constellation: c,
        subcarrier_spacing: 15e3,
        symbol_duration: 1.0 / 15e3,
        cyclic_prefix: 5e-6,
        symbols: 4,
        carrier: 2.5e9,
        transmit_power: 1.0,
        power_split: 0.0,
        sense_pattern: SensePattern::Repeated,
    }
}

/// QPSK, `N_g = 8`, `k = 2` with `m` subcarriers.
pub(crate) fn config(m: usize) -> WaveformConfig {
    small_config(m, 8.min(m), 2.min(m / 2).max(1), Constellation::qpsk())
}
