use crate::gcrypto::Label;

use super::SimError;

/// Bank and slot-within-bank of a wire address; consecutive addresses
/// stripe across banks.
pub fn sww_map(addr: u64, capacity: u64, num_banks: usize) -> (usize, usize) {
    let banks = num_banks as u64;
    ((addr % banks) as usize, ((addr % capacity) / banks) as usize)
}

/// Contents of the sliding wire window: resident addresses are
/// `[base, base + n)`, wire `a` lives in slot `a mod n`.
#[derive(Debug, Clone)]
pub struct SwwState {
    capacity: u64,
    base: u64,
    valid: Vec<bool>,
    labels: Vec<Label>,
}

impl SwwState {
    pub fn new(capacity: u64, base: u64) -> Self {
        assert!(capacity >= 2 && capacity.is_power_of_two());
        SwwState {
            capacity,
            base,
            valid: vec![false; capacity as usize],
            labels: vec![Label::ZERO; capacity as usize],
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn half(&self) -> u64 {
        self.capacity / 2
    }

    /// First address past the resident range.
    pub fn top(&self) -> u64 {
        self.base + self.capacity
    }

    pub fn is_resident(&self, addr: u64) -> bool {
        addr >= self.base && addr < self.top()
    }

    fn slot(&self, addr: u64) -> usize {
        (addr % self.capacity) as usize
    }

    pub fn is_valid(&self, addr: u64) -> bool {
        self.is_resident(addr) && self.valid[self.slot(addr)]
    }

    pub fn write(&mut self, addr: u64, label: Label) -> Result<(), SimError> {
        if !self.is_resident(addr) {
            return Err(SimError::Contract(format!(
                "write to address {addr} outside window [{}, {})",
                self.base,
                self.top()
            )));
        }
        let s = self.slot(addr);
        self.valid[s] = true;
        self.labels[s] = label;
        Ok(())
    }

    /// Reads a resident wire; `Ok(None)` if its slot is not valid yet.
    pub fn read(&self, addr: u64) -> Result<Option<Label>, SimError> {
        if addr < self.base {
            return Err(SimError::Contract(format!(
                "read of departed address {addr} (window base {}) without OoR marking",
                self.base
            )));
        }
        Ok(self.is_valid(addr).then(|| self.labels[self.slot(addr)]))
    }

    /// Slides the window by half its size to make room for `new_output_addr`,
    /// invalidating the departing half.
    pub fn window_advance(&mut self, new_output_addr: u64) -> Result<(), SimError> {
        if new_output_addr < self.top() {
            return Ok(());
        }
        if new_output_addr >= self.top() + self.half() {
            return Err(SimError::Contract(format!(
                "output address {new_output_addr} jumps past window [{}, {}) by more than half a window",
                self.base,
                self.top()
            )));
        }
        for a in self.base..self.base + self.half() {
            let s = self.slot(a);
            self.valid[s] = false;
        }
        self.base += self.half();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn striping() {
        assert_eq!(sww_map(1, 1024, 64).0, 1);
        let banks: HashSet<usize> = (1..=64).map(|a| sww_map(a, 1024, 64).0).collect();
        assert_eq!(banks.len(), 64);
        assert_eq!(sww_map(77, 1024, 64), sww_map(77 + 1024, 1024, 64));
    }

    #[test]
    fn advance_by_half() {
        let mut s = SwwState::new(8, 0);
        s.write(3, Label(3)).unwrap();
        s.window_advance(7).unwrap();
        assert_eq!(s.base(), 0);
        s.window_advance(8).unwrap();
        assert_eq!((s.base(), s.top()), (4, 12));
        assert!(matches!(s.read(3), Err(SimError::Contract(_))));
        assert!(s.window_advance(16).is_err());
    }

    #[test]
    fn departing_slots_are_invalidated() {
        let mut s = SwwState::new(8, 0);
        s.write(1, Label(1)).unwrap();
        s.write(5, Label(5)).unwrap();
        s.window_advance(8).unwrap();
        // address 9 shares slot 1 but has not been written
        assert_eq!(s.read(9).unwrap(), None);
        assert_eq!(s.read(5).unwrap(), Some(Label(5)));
    }
}
