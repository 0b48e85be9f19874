//! Fixed-size worker pool over an indexed task list.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::Result;

/// Run `work` over `tasks` on up to `jobs` threads. Each thread builds its
/// own state with `init` before taking its first task. Results come back
/// in task order; the first error by task index wins and stops the pool.
pub(crate) fn run<T, S, R, I, W>(jobs: usize, tasks: &[T], init: I, work: W) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    I: Fn() -> Result<S> + Sync,
    W: Fn(&mut S, &T) -> Result<R> + Sync,
{
    let slots: Vec<Mutex<Option<Result<R>>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let workers = jobs.clamp(1, tasks.len().max(1));

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut state = None;
                loop {
                    if failed.load(Ordering::SeqCst) {
                        return;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(task) = tasks.get(i) else { return };
                    let result = match &mut state {
                        Some(s) => work(s, task),
                        None => match init() {
                            Ok(s) => work(state.insert(s), task),
                            Err(e) => Err(e),
                        },
                    };
                    if result.is_err() {
                        failed.store(true, Ordering::SeqCst);
                    }
                    *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(result);
                }
            });
        }
    });

    let mut out = Vec::with_capacity(tasks.len());
    let mut first_err = None;
    for slot in slots {
        match slot.into_inner().unwrap_or_else(|e| e.into_inner()) {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => {
                first_err.get_or_insert(e);
            }
            None => {}
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
