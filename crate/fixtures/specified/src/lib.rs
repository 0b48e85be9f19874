pub struct Account {
    owner: String,
    balance: i64,
    history: Vec<i64>,
}

impl Account {
    pub fn new(owner: &str) -> Self {
        Account {
            owner: owner.to_string(),
            balance: 0,
            history: Vec::new(),
        }
    }

    pub fn deposit(&mut self, amount: i64) {
        self.balance += amount;
        self.history.push(amount);
    }

    pub fn balance_after_fee(&self, fee: i64) -> i64 {
        self.balance - fee
    }

    pub fn is_overdrawn(&self) -> bool {
        self.balance < 0
    }

    pub fn interest(&self, rate: f64) -> f64 {
        self.balance as f64 * rate
    }

    pub fn initial(&self) -> char {
        self.owner.chars().next().unwrap_or('?')
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.owner, self.balance)
    }

    pub fn tier(&self) -> &'static str {
        if self.balance > 1000 {
            "premium"
        } else {
            "basic"
        }
    }

    pub fn deposits(&self) -> Vec<i64> {
        self.history.iter().copied().filter(|d| *d > 0).collect()
    }

    pub fn largest(&self) -> Option<i64> {
        self.history.iter().copied().max()
    }
}
