pub fn should_stop(n: i64) -> bool {
    n <= 0
}

pub fn countdown(n: i64) -> i64 {
    if should_stop(n) {
        0
    } else {
        1 + countdown(n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_down() {
        assert_eq!(countdown(5), 5);
    }
}
