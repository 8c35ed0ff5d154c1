use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::{SimulatorError, TimestampStream, PS_PER_SECOND};

/// One recorded multi-fold coincidence: `(channel, time)` per member, in
/// time order, with the total span in picoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceEvent {
    pub members: Vec<(u8, u64)>,
    pub span: u64,
}

impl CoincidenceEvent {
    pub fn fold(&self) -> usize {
        self.members.len()
    }
}

/// Output of a coincidence search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceTally {
    pub events: Vec<CoincidenceEvent>,
    /// Outcome-resolved counts, present when the search covers every channel
    /// group (fold equals the number of groups). Outcome bits follow the
    /// port convention: bit 0 for even channels, MSB is the lowest group.
    pub outcome_counts: Option<Vec<u64>>,
    /// Distinct channel groups seen in the input, ascending.
    pub groups: Vec<u8>,
}

/// Channel group (photon index) owning a detector channel.
pub fn channel_group(channel: u8) -> u8 {
    channel >> 1
}

/// Analytic k-fold accidental-coincidence rate for independent streams:
/// the product of the singles rates times `window^(k-1)`.
pub fn accidental_rate(singles: &[f64], window: f64) -> f64 {
    if singles.is_empty() {
        return 0.0;
    }
    singles.iter().product::<f64>() * window.powi(singles.len() as i32 - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Click {
    t: u64,
    channel: u8,
    stream: usize,
}

/// Greedy earliest-first coincidence finder over a merged time-ordered scan.
///
/// The lowest participating channel group acts as the trigger (for the
/// cascade that is the 846 nm heralding photon). A coincidence is recorded
/// when one click from each of `fold - 1` further distinct groups lies
/// within `window` after a trigger click; the members (the earliest click of
/// each participating group) are consumed and never reused, and a trigger
/// click whose window closes without completing is discarded. This
/// start/multi-stop policy makes the accidental rate of independent streams
/// exactly the textbook `prod(rates) * window^(fold-1)`. Single pass over
/// the merged timeline; the pending buffer never holds more than one window
/// of clicks.
pub fn find_coincidences(
    streams: &[TimestampStream],
    window: f64,
    fold: usize,
) -> Result<CoincidenceTally, SimulatorError> {
    let (window_ps, groups) = validate(streams, window, fold)?;
    if groups.is_empty() {
        return Ok(CoincidenceTally { events: Vec::new(), outcome_counts: None, groups });
    }

    let mut heads: BinaryHeap<Reverse<(u64, u8, usize, usize)>> = BinaryHeap::new();
    for (idx, stream) in streams.iter().enumerate() {
        if let Some(&t) = stream.times.first() {
            heads.push(Reverse((t, stream.channel, idx, 0)));
        }
    }

    let mut state = TallyState::new(&groups, fold);
    let mut pending: VecDeque<Click> = VecDeque::new();
    while let Some(Reverse((t, channel, stream_idx, pos))) = heads.pop() {
        if let Some(&next) = streams[stream_idx].times.get(pos + 1) {
            heads.push(Reverse((next, channel, stream_idx, pos + 1)));
        }
        while let Some(front) = pending.front() {
            if front.t + window_ps < t {
                close_anchor(&mut pending, window_ps, &mut state);
            } else {
                break;
            }
        }
        pending.push_back(Click { t, channel, stream: stream_idx });
    }
    while !pending.is_empty() {
        close_anchor(&mut pending, window_ps, &mut state);
    }

    Ok(state.finish(groups))
}

/// Naive quadratic reference with the same matching policy, kept as an
/// independent cross-check for the single-pass engine.
pub fn reference_find_coincidences(
    streams: &[TimestampStream],
    window: f64,
    fold: usize,
) -> Result<CoincidenceTally, SimulatorError> {
    let (window_ps, groups) = validate(streams, window, fold)?;
    if groups.is_empty() {
        return Ok(CoincidenceTally { events: Vec::new(), outcome_counts: None, groups });
    }

    let mut clicks: Vec<Click> = Vec::new();
    for (idx, stream) in streams.iter().enumerate() {
        clicks.extend(stream.times.iter().map(|&t| Click { t, channel: stream.channel, stream: idx }));
    }
    clicks.sort_by_key(|c| (c.t, c.channel, c.stream));

    let trigger = groups[0];
    let mut state = TallyState::new(&groups, fold);
    let mut consumed = vec![false; clicks.len()];
    for anchor in 0..clicks.len() {
        if consumed[anchor] || channel_group(clicks[anchor].channel) != trigger {
            continue;
        }
        let deadline = clicks[anchor].t + window_ps;
        let mut member_idx: Vec<usize> = Vec::with_capacity(fold);
        let mut seen_groups: Vec<u8> = Vec::with_capacity(fold);
        for j in anchor..clicks.len() {
            if clicks[j].t > deadline {
                break;
            }
            if consumed[j] {
                continue;
            }
            let g = channel_group(clicks[j].channel);
            if !seen_groups.contains(&g) {
                seen_groups.push(g);
                member_idx.push(j);
                if member_idx.len() == fold {
                    break;
                }
            }
        }
        // The trigger is spent either way: consumed by the event, or dead
        // because no completion can arrive once its window has closed.
        consumed[anchor] = true;
        if member_idx.len() == fold {
            let members: Vec<(u8, u64)> =
                member_idx.iter().map(|&j| (clicks[j].channel, clicks[j].t)).collect();
            for &j in &member_idx {
                consumed[j] = true;
            }
            state.record(members);
        }
    }

    Ok(state.finish(groups))
}

fn validate(
    streams: &[TimestampStream],
    window: f64,
    fold: usize,
) -> Result<(u64, Vec<u8>), SimulatorError> {
    if !(window > 0.0) {
        return Err(SimulatorError::BadWindow(window));
    }
    for stream in streams {
        stream.validate()?;
    }
    let mut groups: Vec<u8> = streams
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| channel_group(s.channel))
        .collect();
    groups.sort_unstable();
    groups.dedup();
    // Entirely empty inputs trivially yield zero events for any fold.
    if !groups.is_empty() && (fold < 2 || fold > groups.len()) {
        return Err(SimulatorError::BadFold { fold, groups: groups.len() });
    }
    let window_ps = (window * PS_PER_SECOND).round().max(1.0) as u64;
    Ok((window_ps, groups))
}

struct TallyState {
    events: Vec<CoincidenceEvent>,
    outcome_counts: Option<Vec<u64>>,
    group_rank: [usize; 256],
    n_groups: usize,
    fold: usize,
    trigger: u8,
}

impl TallyState {
    fn new(groups: &[u8], fold: usize) -> Self {
        let mut group_rank = [0usize; 256];
        for (rank, &g) in groups.iter().enumerate() {
            group_rank[g as usize] = rank;
        }
        let outcome_counts =
            if fold == groups.len() { Some(vec![0u64; 1 << groups.len()]) } else { None };
        Self {
            events: Vec::new(),
            outcome_counts,
            group_rank,
            n_groups: groups.len(),
            fold,
            trigger: groups[0],
        }
    }

    fn record(&mut self, members: Vec<(u8, u64)>) {
        debug_assert_eq!(members.len(), self.fold);
        if let Some(counts) = &mut self.outcome_counts {
            let mut outcome = 0usize;
            for &(channel, _) in &members {
                let rank = self.group_rank[channel_group(channel) as usize];
                let bit = (channel & 1) as usize;
                outcome |= bit << (self.n_groups - 1 - rank);
            }
            counts[outcome] += 1;
        }
        let span = members.last().expect("nonempty").1 - members[0].1;
        self.events.push(CoincidenceEvent { members, span });
    }

    fn finish(self, groups: Vec<u8>) -> CoincidenceTally {
        CoincidenceTally { events: self.events, outcome_counts: self.outcome_counts, groups }
    }
}

fn close_anchor(pending: &mut VecDeque<Click>, window_ps: u64, state: &mut TallyState) {
    let anchor = *pending.front().expect("nonempty pending");
    if channel_group(anchor.channel) != state.trigger {
        // Only trigger-group clicks anchor events; expired clicks from the
        // other groups can no longer serve any open trigger.
        pending.pop_front();
        return;
    }
    let deadline = anchor.t + window_ps;
    let mut member_idx: Vec<usize> = Vec::with_capacity(state.fold);
    let mut seen_groups: Vec<u8> = Vec::with_capacity(state.fold);
    for (i, click) in pending.iter().enumerate() {
        if click.t > deadline {
            break;
        }
        let g = channel_group(click.channel);
        if !seen_groups.contains(&g) {
            seen_groups.push(g);
            member_idx.push(i);
            if member_idx.len() == state.fold {
                break;
            }
        }
    }
    if member_idx.len() == state.fold {
        let members: Vec<(u8, u64)> =
            member_idx.iter().map(|&i| (pending[i].channel, pending[i].t)).collect();
        for &i in member_idx.iter().rev() {
            pending.remove(i);
        }
        state.record(members);
    } else {
        pending.pop_front();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_for, domain};
    use crate::simulator::ClickOrigin;
    use rand::Rng;
    use rand_distr::{Distribution, Exp};

    fn stream(channel: u8, times: Vec<u64>) -> TimestampStream {
        TimestampStream { channel, times, origin: ClickOrigin::Signal }
    }

    fn poisson_stream(channel: u8, rate: f64, duration: f64, seed: u64) -> TimestampStream {
        let mut rng = rng_for(seed, domain::BENCH, channel as u64);
        let gap = Exp::new(rate).unwrap();
        let mut t = gap.sample(&mut rng);
        let mut times = Vec::new();
        while t < duration {
            times.push((t * PS_PER_SECOND).round() as u64);
            t += gap.sample(&mut rng);
        }
        times.dedup();
        stream(channel, times)
    }

    #[test]
    fn two_clicks_inside_window_pair() {
        let streams = vec![stream(0, vec![1000]), stream(2, vec![1250])];
        let tally = find_coincidences(&streams, 0.5e-9, 2).unwrap();
        assert_eq!(tally.events.len(), 1);
        assert_eq!(tally.events[0].span, 250);
        assert_eq!(tally.outcome_counts.as_deref(), Some(&[1u64, 0, 0, 0][..]));
    }

    #[test]
    fn clicks_outside_window_do_not_pair() {
        let streams = vec![stream(0, vec![0]), stream(2, vec![1000])];
        let tally = find_coincidences(&streams, 0.5e-9, 2).unwrap();
        assert!(tally.events.is_empty());
    }

    #[test]
    fn boundary_click_included() {
        let streams = vec![stream(0, vec![0]), stream(2, vec![500])];
        let tally = find_coincidences(&streams, 0.5e-9, 2).unwrap();
        assert_eq!(tally.events.len(), 1);
        assert_eq!(tally.events[0].span, 500);
    }

    #[test]
    fn consumed_clicks_are_not_reused() {
        // Three clicks of group 0 racing for one group-1 click: only the
        // earliest pairs, the later two die alone.
        let streams = vec![stream(0, vec![0, 100, 200]), stream(2, vec![150])];
        let tally = find_coincidences(&streams, 0.5e-9, 2).unwrap();
        assert_eq!(tally.events.len(), 1);
        assert_eq!(tally.events[0].members, vec![(0, 0), (2, 150)]);
    }

    #[test]
    fn ports_resolve_outcomes() {
        // Photon 0 fires the − port (channel 1), photon 1 the + port
        // (channel 2): outcome "-+" = index 2 of 4.
        let streams = vec![stream(1, vec![100]), stream(2, vec![300])];
        let tally = find_coincidences(&streams, 1.0e-9, 2).unwrap();
        assert_eq!(tally.outcome_counts.as_deref(), Some(&[0u64, 0, 1, 0][..]));
    }

    #[test]
    fn threefold_requires_all_groups() {
        let streams =
            vec![stream(0, vec![100]), stream(2, vec![200]), stream(4, vec![5000])];
        let tally = find_coincidences(&streams, 0.5e-9, 3).unwrap();
        assert!(tally.events.is_empty());
        let tally = find_coincidences(&streams, 5.0e-9, 3).unwrap();
        assert_eq!(tally.events.len(), 1);
        assert_eq!(tally.events[0].fold(), 3);
    }

    #[test]
    fn fold_bounds_checked() {
        let streams = vec![stream(0, vec![100]), stream(2, vec![200])];
        assert!(matches!(
            find_coincidences(&streams, 1e-9, 1),
            Err(SimulatorError::BadFold { .. })
        ));
        assert!(matches!(
            find_coincidences(&streams, 1e-9, 3),
            Err(SimulatorError::BadFold { .. })
        ));
    }

    #[test]
    fn empty_streams_yield_zero_events() {
        let empty = vec![stream(0, vec![]), stream(2, vec![])];
        let tally = find_coincidences(&empty, 1e-9, 2).unwrap();
        assert!(tally.events.is_empty());
        assert!(tally.groups.is_empty());
        let tally = find_coincidences(&[], 1e-9, 3).unwrap();
        assert!(tally.events.is_empty());
    }

    #[test]
    fn clicks_preceding_the_trigger_do_not_pair() {
        // Start/multi-stop policy: a group-1 click just before the trigger
        // click is not matched backwards.
        let streams = vec![stream(0, vec![1000]), stream(2, vec![900])];
        let tally = find_coincidences(&streams, 0.5e-9, 2).unwrap();
        assert!(tally.events.is_empty());
        // ...but a later one is.
        let streams = vec![stream(0, vec![1000]), stream(2, vec![900, 1100])];
        let tally = find_coincidences(&streams, 0.5e-9, 2).unwrap();
        assert_eq!(tally.events.len(), 1);
        assert_eq!(tally.events[0].members, vec![(0, 1000), (2, 1100)]);
    }

    #[test]
    fn unsorted_streams_rejected() {
        let bad = TimestampStream {
            channel: 0,
            times: vec![10, 10],
            origin: ClickOrigin::Signal,
        };
        assert!(matches!(
            find_coincidences(&[bad], 1e-9, 2),
            Err(SimulatorError::UnsortedStream { .. })
        ));
    }

    #[test]
    fn accidental_rate_formula() {
        assert_eq!(accidental_rate(&[0.0, 1.0e5], 1e-9), 0.0);
        let two = accidental_rate(&[1.0e5, 1.0e5], 1.0e-9);
        assert!((two - 10.0).abs() < 1e-9);
        let three = accidental_rate(&[1.0e3, 1.0e3, 1.0e3], 0.5e-9);
        assert!((three - 2.5e-10).abs() < 1e-22);
    }

    #[test]
    fn accidentals_match_analytic_rate() {
        // Independent 1e5/s streams, 1 ns window, 20 s: expect 200 ± 3*sqrt(200).
        let duration = 20.0;
        let streams = vec![
            poisson_stream(0, 1.0e5, duration, 1),
            poisson_stream(2, 1.0e5, duration, 2),
        ];
        let tally = find_coincidences(&streams, 1.0e-9, 2).unwrap();
        let expected = accidental_rate(&[1.0e5, 1.0e5], 1.0e-9) * duration;
        let got = tally.events.len() as f64;
        assert!(
            (got - expected).abs() < 3.0 * expected.sqrt() + 3.0,
            "accidentals {got} vs analytic {expected}"
        );
    }

    #[test]
    fn window_growth_is_monotone() {
        let streams = vec![
            poisson_stream(0, 5.0e4, 5.0, 3),
            poisson_stream(2, 5.0e4, 5.0, 4),
            poisson_stream(4, 5.0e4, 5.0, 5),
        ];
        let mut last = 0usize;
        for k in 1..=8 {
            let window = k as f64 * 0.5e-9;
            let tally = find_coincidences(&streams, window, 3).unwrap();
            assert!(
                tally.events.len() >= last,
                "events decreased from {last} at window {window}"
            );
            last = tally.events.len();
        }
    }

    #[test]
    fn agrees_with_quadratic_reference() {
        let mut rng = rng_for(0xABCD, domain::BENCH, 99);
        for case in 0..25u64 {
            let n_groups = 2 + (case % 2) as u8;
            let duration = 2.0;
            let mut streams = Vec::new();
            for g in 0..n_groups {
                for port in 0..2u8 {
                    let rate = 1.0e4 * (1.0 + rng.random::<f64>());
                    streams.push(poisson_stream(2 * g + port, rate, duration, 1000 + case * 10));
                }
            }
            let window = 0.5e-9 * (1.0 + (case % 5) as f64);
            let fast = find_coincidences(&streams, window, n_groups as usize).unwrap();
            let slow = reference_find_coincidences(&streams, window, n_groups as usize).unwrap();
            assert_eq!(fast, slow, "mismatch in case {case}");
        }
    }
}
