//! Bounded FIFO connecting pipeline stages.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};

/// Items that can fold an evicted predecessor into themselves so that a
/// drop loses as little information as possible.
pub trait Coalesce {
    fn absorb_older(&mut self, older: Self);
}

#[derive(Debug)]
struct State<T> {
    items: VecDeque<T>,
    closed: bool,
    high_water: usize,
    evicted: usize,
}

#[derive(Debug)]
pub struct BoundedQueue<T> {
    capacity: usize,
    state: Mutex<State<T>>,
    not_empty: Condvar,
    not_full: Condvar,
}

impl<T> BoundedQueue<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        Self {
            capacity,
            state: Mutex::new(State {
                items: VecDeque::with_capacity(capacity),
                closed: false,
                high_water: 0,
                evicted: 0,
            }),
            not_empty: Condvar::new(),
            not_full: Condvar::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Blocks while full. Returns the item back if the queue was closed.
    pub fn push_blocking(&self, item: T) -> Result<(), T> {
        let mut st = self.state.lock().expect("queue lock");
        while st.items.len() >= self.capacity && !st.closed {
            st = self.not_full.wait(st).expect("queue lock");
        }
        if st.closed {
            return Err(item);
        }
        st.items.push_back(item);
        st.high_water = st.high_water.max(st.items.len());
        drop(st);
        self.not_empty.notify_one();
        Ok(())
    }

    /// Blocks until an item is available; `None` once closed and drained.
    pub fn pop(&self) -> Option<T> {
        let mut st = self.state.lock().expect("queue lock");
        loop {
            if let Some(item) = st.items.pop_front() {
                drop(st);
                self.not_full.notify_one();
                return Some(item);
            }
            if st.closed {
                return None;
            }
            st = self.not_empty.wait(st).expect("queue lock");
        }
    }

    /// No more pushes; consumers drain what is left.
    pub fn close(&self) {
        self.state.lock().expect("queue lock").closed = true;
        self.not_empty.notify_all();
        self.not_full.notify_all();
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("queue lock").items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn high_water(&self) -> usize {
        self.state.lock().expect("queue lock").high_water
    }

    pub fn evicted(&self) -> usize {
        self.state.lock().expect("queue lock").evicted
    }
}

impl<T: Coalesce> BoundedQueue<T> {
    /// Never blocks: when full, the oldest item is removed and folded into
    /// its successor. Returns whether an eviction happened.
    pub fn push_evicting(&self, mut item: T) -> Result<bool, T> {
        let mut st = self.state.lock().expect("queue lock");
        if st.closed {
            return Err(item);
        }
        let mut evicted = false;
        if st.items.len() >= self.capacity {
            let oldest = st.items.pop_front().expect("full queue is non-empty");
            match st.items.front_mut() {
                Some(next) => next.absorb_older(oldest),
                None => item.absorb_older(oldest),
            }
            st.evicted += 1;
            evicted = true;
        }
        st.items.push_back(item);
        st.high_water = st.high_water.max(st.items.len());
        drop(st);
        self.not_empty.notify_one();
        Ok(evicted)
    }
}
