use std::f64::consts::PI;

/// Half-cosine decay from `initial_lr` to `floor_lr` over `total_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineSchedule {
    pub initial_lr: f64,
    pub total_steps: u64,
    pub floor_lr: f64,
}

impl CosineSchedule {
    pub fn new(initial_lr: f64, total_steps: u64) -> Self {
        Self {
            initial_lr,
            total_steps: total_steps.max(1),
            floor_lr: 0.0,
        }
    }

    pub fn lr(&self, step: u64) -> f64 {
        cosine_lr(step, self)
    }
}

/// Learning rate at `step`. Steps past `total_steps` clamp to the floor.
pub fn cosine_lr(step: u64, schedule: &CosineSchedule) -> f64 {
    let total = schedule.total_steps.max(1);
    let s = step.min(total);
    if s == 0 {
        return schedule.initial_lr;
    }
    if s == total {
        return schedule.floor_lr;
    }
    let progress = s as f64 / total as f64;
    schedule.floor_lr + (schedule.initial_lr - schedule.floor_lr) * (1.0 + (PI * progress).cos()) / 2.0
}
