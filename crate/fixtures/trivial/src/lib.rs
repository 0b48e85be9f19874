pub struct Answer {
    value: u32,
}

impl Answer {
    pub fn new(value: u32) -> Self {
        Answer { value }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn answer(&self) -> u32 {
        42
    }
}
