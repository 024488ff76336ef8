//! NOR flash with sector granularity and realistic erase/program latency.
//!
//! Timers advance with the plant at the end of each step. A reset aborts
//! every in-flight operation outside the whitelist and leaves the sector
//! `Invalid`: the content is not trusted and the payload never lands.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Completion slack for timers that count down in floating point.
const TIMER_EPS: f64 = 1e-9;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlashConfig {
    pub sectors: usize,
    /// bytes
    pub sector_size: usize,
    /// s
    pub erase_time: f64,
    /// s
    pub program_time: f64,
    /// Sectors whose in-flight operations survive a reset (e.g. log areas).
    pub whitelist: Vec<usize>,
}

impl Default for FlashConfig {
    fn default() -> Self {
        Self {
            sectors: 4,
            sector_size: 16 * 1024,
            erase_time: 0.210,
            program_time: 0.460,
            whitelist: Vec::new(),
        }
    }
}

impl FlashConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.sectors == 0 || self.sector_size == 0 {
            return Err("flash needs at least one non-empty sector".into());
        }
        if !(self.erase_time >= 0.0 && self.program_time >= 0.0) {
            return Err("flash timings must be >= 0".into());
        }
        if let Some(s) = self.whitelist.iter().find(|&&s| s >= self.sectors) {
            return Err(format!("flash whitelist names sector {s}, which does not exist"));
        }
        Ok(())
    }

    /// Minimum uninterrupted time to rewrite one sector.
    pub fn persist_time(&self) -> f64 {
        self.erase_time + self.program_time
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlashOp {
    Erase,
    Program,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SectorState {
    Valid,
    Erasing { remaining: f64 },
    Programming { remaining: f64 },
    /// An operation was cut short; content is undefined.
    Invalid,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlashError {
    #[error("flash sector {0} does not exist")]
    NoSuchSector(usize),
    #[error("flash sector {0} is busy")]
    Busy(usize),
    #[error("flash sector {0} must be erased in this epoch before it can be programmed")]
    OrderViolation(usize),
    #[error("flash sector {0} does not hold valid content")]
    NotValid(usize),
    #[error("payload of {len} bytes does not fit a {size}-byte sector")]
    PayloadTooLarge { len: usize, size: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    content: Vec<u8>,
    state: SectorState,
    erased_in_epoch: Option<u64>,
    pending: Vec<u8>,
}

impl Sector {
    pub fn state(&self) -> SectorState {
        self.state
    }

    /// Content, if the sector is readable.
    pub fn read(&self) -> Option<&[u8]> {
        matches!(self.state, SectorState::Valid).then_some(&self.content[..])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlashModel {
    sectors: Vec<Sector>,
    sector_size: usize,
    erase_time: f64,
    program_time: f64,
    whitelist: Vec<usize>,
}

impl FlashModel {
    /// Flash filled with a deterministic firmware-like pattern.
    pub fn new(config: &FlashConfig) -> Self {
        let sectors = (0..config.sectors)
            .map(|i| Sector {
                content: (0..config.sector_size)
                    .map(|j| ((i * 131 + j * 17 + 0x5A) % 251) as u8)
                    .collect(),
                state: SectorState::Valid,
                erased_in_epoch: None,
                pending: Vec::new(),
            })
            .collect();
        Self {
            sectors,
            sector_size: config.sector_size,
            erase_time: config.erase_time,
            program_time: config.program_time,
            whitelist: config.whitelist.clone(),
        }
    }

    pub fn sector(&self, index: usize) -> Option<&Sector> {
        self.sectors.get(index)
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn sector_size(&self) -> usize {
        self.sector_size
    }

    fn sector_mut(&mut self, index: usize) -> Result<&mut Sector, FlashError> {
        self.sectors.get_mut(index).ok_or(FlashError::NoSuchSector(index))
    }

    /// Start an erase or program. Erase also accepts an `Invalid` sector,
    /// which is how a sector recovers from an aborted operation.
    pub fn begin(&mut self, index: usize, op: FlashOp, payload: &[u8], epoch: u64) -> Result<(), FlashError> {
        let (erase_time, program_time, size) = (self.erase_time, self.program_time, self.sector_size);
        let sector = self.sector_mut(index)?;
        match sector.state {
            SectorState::Erasing { .. } | SectorState::Programming { .. } => return Err(FlashError::Busy(index)),
            SectorState::Invalid if op == FlashOp::Program => return Err(FlashError::NotValid(index)),
            _ => {}
        }
        match op {
            FlashOp::Erase => {
                sector.erased_in_epoch = None;
                sector.state = SectorState::Erasing { remaining: erase_time };
            }
            FlashOp::Program => {
                if sector.erased_in_epoch != Some(epoch) {
                    return Err(FlashError::OrderViolation(index));
                }
                if payload.len() > size {
                    return Err(FlashError::PayloadTooLarge { len: payload.len(), size });
                }
                sector.pending = payload.to_vec();
                sector.state = SectorState::Programming { remaining: program_time };
            }
        }
        Ok(())
    }

    /// Let `dt` of hardware time pass.
    pub fn advance(&mut self, dt: f64, epoch: u64) {
        for sector in &mut self.sectors {
            match &mut sector.state {
                SectorState::Erasing { remaining } => {
                    *remaining -= dt;
                    if *remaining <= TIMER_EPS {
                        sector.content.fill(0xFF);
                        sector.state = SectorState::Valid;
                        sector.erased_in_epoch = Some(epoch);
                    }
                }
                SectorState::Programming { remaining } => {
                    *remaining -= dt;
                    if *remaining <= TIMER_EPS {
                        // Programming can only clear bits of the erased image.
                        for (dst, src) in sector.content.iter_mut().zip(&sector.pending) {
                            *dst &= *src;
                        }
                        sector.pending.clear();
                        sector.erased_in_epoch = None;
                        sector.state = SectorState::Valid;
                    }
                }
                SectorState::Valid | SectorState::Invalid => {}
            }
        }
    }

    pub fn is_busy(&self) -> bool {
        self.sectors
            .iter()
            .any(|s| matches!(s.state, SectorState::Erasing { .. } | SectorState::Programming { .. }))
    }

    /// Abort non-whitelisted in-flight operations. Returns how many were cut.
    pub fn abort_in_flight(&mut self) -> usize {
        let mut aborted = 0;
        for (i, sector) in self.sectors.iter_mut().enumerate() {
            if self.whitelist.contains(&i) {
                continue;
            }
            if matches!(sector.state, SectorState::Erasing { .. } | SectorState::Programming { .. }) {
                sector.state = SectorState::Invalid;
                sector.pending.clear();
                aborted += 1;
            }
            sector.erased_in_epoch = None;
        }
        aborted
    }

    /// In-place write that can only turn 1 bits into 0 bits: content AND
    /// mask. Completes immediately.
    pub fn bit_clear(&mut self, index: usize, mask: &[u8]) -> Result<(), FlashError> {
        let sector = self.sector_mut(index)?;
        if sector.state != SectorState::Valid {
            return Err(FlashError::NotValid(index));
        }
        for (dst, m) in sector.content.iter_mut().zip(mask) {
            *dst &= *m;
        }
        Ok(())
    }
}

/// Whether `target` can be produced from `content` by clearing bits only.
pub fn reachable_by_bit_clear(content: &[u8], target: &[u8]) -> bool {
    content.len() >= target.len() && content.iter().zip(target).all(|(c, t)| t & !c == 0)
}
