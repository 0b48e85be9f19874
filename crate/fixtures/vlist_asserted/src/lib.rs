#![allow(non_snake_case)]

pub struct VList {
    elements: Vec<i64>,
    version: u32,
}

impl VList {
    pub fn new() -> Self {
        VList {
            elements: Vec::new(),
            version: 0,
        }
    }

    pub fn add(&mut self, item: i64) {
        self.elements.push(item);
        self.incrementVersion();
    }

    fn incrementVersion(&mut self) {
        self.version += 1;
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn version(&self) -> u32 {
        self.version
    }
}
