//! Wall-clock abstraction so time budgets work without `std`.

/// Monotonic elapsed-seconds source used for time budgets and phase
/// timing. Budgets only ever abort work early; they never change the
/// content of a successful run, which keeps successful runs
/// reproducible regardless of timer jitter.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// Clock that never advances: budgets are effectively disabled.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// `std::time::Instant`-backed clock.
#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct WallClock(std::time::Instant);

#[cfg(feature = "std")]
impl WallClock {
    pub fn start() -> Self {
        Self(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Default for WallClock {
    fn default() -> Self {
        Self::start()
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
