pub struct Countdown {
    remaining: u32,
}

impl Countdown {
    pub fn new(remaining: u32) -> Self {
        Countdown { remaining }
    }

    pub fn tick(&mut self) {
        self.remaining -= 1;
    }

    pub fn run(&mut self) -> u32 {
        let mut steps = 0;
        while self.remaining > 0 {
            self.tick();
            steps += 1;
        }
        steps
    }
}
