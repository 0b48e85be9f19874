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
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn testAdd() {
        let mut l = VList::new();
        l.add(1);
        assert_eq!(l.size(), 1);
    }
}
