#![allow(non_snake_case)]

use std::cell::Cell;

pub struct AnyOfAny {
    rejected: Cell<usize>,
}

impl AnyOfAny {
    pub fn new() -> Self {
        AnyOfAny {
            rejected: Cell::new(0),
        }
    }

    pub fn checkNumberOfArgs(&self, numInputs: usize) {
        if numInputs < 2 {
            let missing = 2 - numInputs;
            self.rejected.set(self.rejected.get() + missing);
            panic!("expected at least 2 arguments, {} missing", missing);
        }
    }

    pub fn evaluate(&self, args: &[i64]) -> i64 {
        self.checkNumberOfArgs(args.len());
        args.iter().sum()
    }
}
