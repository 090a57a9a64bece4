//! In-process append-only hash-chained ledger.
//!
//! Stands in for the blockchain layer: every contract call becomes a
//! transaction, each append commits one block, and the chain can be
//! re-verified or scored for integrity after the fact. Committed bytes are
//! covered by SHA-256; the recorded wall latency is deliberately outside
//! the hash so identical runs hash identically on any machine.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Contract operations a transaction can record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Deposit,
    Confirm,
    Settle,
    RewardQuery,
    Penalty,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Deposit => "deposit",
            OpKind::Confirm => "confirm",
            OpKind::Settle => "settle",
            OpKind::RewardQuery => "reward_query",
            OpKind::Penalty => "penalty",
        }
    }
}

/// A transaction not yet committed to a block; the ledger assigns ids.
#[derive(Debug, Clone)]
pub struct TxDraft {
    pub contract_id: String,
    pub op: OpKind,
    /// Canonical JSON bytes (see [`crate::canon`]).
    pub payload: Vec<u8>,
    pub tick: u64,
    pub wall_latency_ns: u64,
}

/// A committed transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerTransaction {
    pub tx_id: u64,
    pub contract_id: String,
    pub op: OpKind,
    pub payload: Vec<u8>,
    pub tick: u64,
    pub wall_latency_ns: u64,
}

impl LedgerTransaction {
    /// The payload parsed back into JSON.
    pub fn payload_value(&self) -> serde_json::Value {
        serde_json::from_slice(&self.payload).unwrap_or(serde_json::Value::Null)
    }

    // Committed byte image: everything except wall_latency_ns,
    // length-prefixed so the encoding is unambiguous.
    fn committed_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.tx_id.to_le_bytes());
        out.extend_from_slice(&(self.contract_id.len() as u32).to_le_bytes());
        out.extend_from_slice(self.contract_id.as_bytes());
        let op = self.op.as_str();
        out.extend_from_slice(&(op.len() as u32).to_le_bytes());
        out.extend_from_slice(op.as_bytes());
        out.extend_from_slice(&self.tick.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
    }
}

/// One block: height, parent hash, transactions, own hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerBlock {
    pub height: u64,
    pub prev_hash: [u8; 32],
    pub txs: Vec<LedgerTransaction>,
    pub block_hash: [u8; 32],
}

impl LedgerBlock {
    /// SHA-256 over height (u64-LE) || prev_hash || committed tx bytes.
    pub fn compute_hash(height: u64, prev_hash: &[u8; 32], txs: &[LedgerTransaction]) -> [u8; 32] {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&height.to_le_bytes());
        bytes.extend_from_slice(prev_hash);
        for tx in txs {
            tx.committed_bytes(&mut bytes);
        }
        let digest = Sha256::digest(&bytes);
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

/// Where a chain verification failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainFault {
    pub height: u64,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    BadBlockHash,
    BadPrevHash,
    BadHeight,
}

impl fmt::Display for ChainFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FaultKind::BadBlockHash => "block hash mismatch",
            FaultKind::BadPrevHash => "previous-hash link broken",
            FaultKind::BadHeight => "height out of sequence",
        };
        write!(f, "{what} at height {}", self.height)
    }
}

impl core::error::Error for ChainFault {}

/// Errors from ledger queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerError {
    EmptyWindow,
    EmptyLedger,
}

impl fmt::Display for LedgerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LedgerError::EmptyWindow => write!(f, "integrity window is empty"),
            LedgerError::EmptyLedger => write!(f, "ledger has no transactions"),
        }
    }
}

impl core::error::Error for LedgerError {}

/// Latency statistics over recorded transactions, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_s: f64,
    pub stddev_s: f64,
    pub p99_s: f64,
    pub samples: usize,
}

/// The append-only chain. Single writer; committed blocks are never
/// mutated or removed (no API exists to do so).
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    blocks: Vec<LedgerBlock>,
    next_tx_id: u64,
}

impl Ledger {
    pub fn new() -> Ledger {
        Ledger::default()
    }

    pub fn blocks(&self) -> &[LedgerBlock] {
        &self.blocks
    }

    pub fn height(&self) -> usize {
        self.blocks.len()
    }

    pub fn tx_count(&self) -> usize {
        self.blocks.iter().map(|b| b.txs.len()).sum()
    }

    pub fn iter_txs(&self) -> impl Iterator<Item = &LedgerTransaction> {
        self.blocks.iter().flat_map(|b| b.txs.iter())
    }

    pub fn last_block_hash(&self) -> [u8; 32] {
        self.blocks.last().map_or([0u8; 32], |b| b.block_hash)
    }

    /// Commit one block holding `drafts`, assigning consecutive tx ids.
    /// The append is atomic: the block is fully formed before it is pushed.
    pub fn append(&mut self, drafts: Vec<TxDraft>) -> &LedgerBlock {
        assert!(
            !drafts.is_empty(),
            "append requires at least one transaction"
        );
        let height = self.blocks.len() as u64;
        let prev_hash = self.last_block_hash();
        let txs: Vec<LedgerTransaction> = drafts
            .into_iter()
            .map(|d| {
                let tx_id = self.next_tx_id;
                self.next_tx_id += 1;
                LedgerTransaction {
                    tx_id,
                    contract_id: d.contract_id,
                    op: d.op,
                    payload: d.payload,
                    tick: d.tick,
                    wall_latency_ns: d.wall_latency_ns,
                }
            })
            .collect();
        let block_hash = LedgerBlock::compute_hash(height, &prev_hash, &txs);
        self.blocks.push(LedgerBlock {
            height,
            prev_hash,
            txs,
            block_hash,
        });
        self.blocks.last().expect("just pushed")
    }

    /// Recompute every hash and link; report the first bad height.
    pub fn verify_chain(&self) -> Result<(), ChainFault> {
        let mut prev = [0u8; 32];
        for (index, block) in self.blocks.iter().enumerate() {
            let height = index as u64;
            if block.height != height {
                return Err(ChainFault {
                    height,
                    kind: FaultKind::BadHeight,
                });
            }
            if block.prev_hash != prev {
                return Err(ChainFault {
                    height,
                    kind: FaultKind::BadPrevHash,
                });
            }
            let expect = LedgerBlock::compute_hash(block.height, &block.prev_hash, &block.txs);
            if block.block_hash != expect {
                return Err(ChainFault {
                    height,
                    kind: FaultKind::BadBlockHash,
                });
            }
            prev = block.block_hash;
        }
        Ok(())
    }

    /// Fraction of the last `window` calls that satisfy all three contract
    /// invariants: (a) per-contract penalties never decrease, (b) rewards
    /// stay inside their declared bounds, (c) no call errored.
    pub fn integrity_score(&self, window: usize) -> Result<f64, LedgerError> {
        if window == 0 {
            return Err(LedgerError::EmptyWindow);
        }
        let total = self.tx_count();
        if total == 0 {
            return Err(LedgerError::EmptyWindow);
        }

        // Pass/fail is evaluated over the whole chain so that per-contract
        // penalty tracking has its full prefix, then scored on the tail.
        let mut last_penalty: alloc::collections::BTreeMap<&str, i64> =
            alloc::collections::BTreeMap::new();
        let mut passes: Vec<bool> = Vec::with_capacity(total);
        for tx in self.iter_txs() {
            let v = tx.payload_value();
            let mut ok = true;

            // (c) no exception triggers
            if !v.get("error").map_or(true, |e| e.is_null()) {
                ok = false;
            }
            // (a) consistent penalty tracking
            if let Some(p) = v.get("penalties_minor").and_then(|p| p.as_i64()) {
                let entry = last_penalty.entry(tx.contract_id.as_str()).or_insert(0);
                if p < *entry {
                    ok = false;
                }
                *entry = (*entry).max(p);
            }
            // (b) reward scaling outputs
            if tx.op == OpKind::RewardQuery {
                let r = v.get("reward").and_then(|x| x.as_f64());
                let lo = v.get("r_min").and_then(|x| x.as_f64());
                let hi = v.get("r_max").and_then(|x| x.as_f64());
                match (r, lo, hi) {
                    (Some(r), Some(lo), Some(hi)) if r >= lo && r <= hi => {}
                    _ => ok = false,
                }
            }
            passes.push(ok);
        }

        let k = window.min(total);
        let good = passes[total - k..].iter().filter(|&&p| p).count();
        Ok(good as f64 / k as f64)
    }

    /// Mean, population standard deviation, and nearest-rank p99 of the
    /// recorded wall latencies, in seconds.
    pub fn latency_stats(&self) -> Result<LatencyStats, LedgerError> {
        let mut samples: Vec<u64> = self.iter_txs().map(|t| t.wall_latency_ns).collect();
        if samples.is_empty() {
            return Err(LedgerError::EmptyLedger);
        }
        samples.sort_unstable();
        let n = samples.len();
        let mean_ns = samples.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        let var = samples
            .iter()
            .map(|&x| {
                let d = x as f64 - mean_ns;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        let p99_index = ((n * 99).div_ceil(100)).saturating_sub(1);
        Ok(LatencyStats {
            mean_s: mean_ns / 1e9,
            stddev_s: libm::sqrt(var) / 1e9,
            p99_s: samples[p99_index] as f64 / 1e9,
            samples: n,
        })
    }

    /// Render as JSON Lines: one block per line, hashes hex lowercase.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for block in &self.blocks {
            let wire = BlockWire::from_block(block);
            out.push_str(&crate::canon::to_canonical_string(&wire));
            out.push('\n');
        }
        out
    }

    /// Parse a JSON Lines chain. Blank lines are ignored. The result is
    /// structurally loaded, not verified; call [`Ledger::verify_chain`].
    pub fn from_jsonl(text: &str) -> Result<Ledger, ParseError> {
        let mut blocks = Vec::new();
        let mut next_tx_id = 0;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let wire: BlockWire =
                serde_json::from_str(line).map_err(|_| ParseError { line: lineno + 1 })?;
            let block = wire.into_block().ok_or(ParseError { line: lineno + 1 })?;
            if let Some(last) = block.txs.last() {
                next_tx_id = next_tx_id.max(last.tx_id + 1);
            }
            blocks.push(block);
        }
        Ok(Ledger { blocks, next_tx_id })
    }
}

/// A line that could not be parsed as a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unparsable ledger block at line {}", self.line)
    }
}

impl core::error::Error for ParseError {}

#[derive(Serialize, Deserialize)]
struct BlockWire {
    height: u64,
    prev_hash: String,
    block_hash: String,
    txs: Vec<TxWire>,
}

#[derive(Serialize, Deserialize)]
struct TxWire {
    tx_id: u64,
    contract_id: String,
    op: OpKind,
    payload: serde_json::Value,
    tick: u64,
    wall_latency_ns: u64,
}

impl BlockWire {
    fn from_block(b: &LedgerBlock) -> BlockWire {
        BlockWire {
            height: b.height,
            prev_hash: hex_lower(&b.prev_hash),
            block_hash: hex_lower(&b.block_hash),
            txs: b
                .txs
                .iter()
                .map(|t| TxWire {
                    tx_id: t.tx_id,
                    contract_id: t.contract_id.clone(),
                    op: t.op,
                    payload: t.payload_value(),
                    tick: t.tick,
                    wall_latency_ns: t.wall_latency_ns,
                })
                .collect(),
        }
    }

    fn into_block(self) -> Option<LedgerBlock> {
        Some(LedgerBlock {
            height: self.height,
            prev_hash: hex_decode32(&self.prev_hash)?,
            block_hash: hex_decode32(&self.block_hash)?,
            txs: self
                .txs
                .into_iter()
                .map(|t| LedgerTransaction {
                    tx_id: t.tx_id,
                    contract_id: t.contract_id,
                    op: t.op,
                    payload: crate::canon::to_canonical_bytes(&t.payload),
                    tick: t.tick,
                    wall_latency_ns: t.wall_latency_ns,
                })
                .collect(),
        })
    }
}

fn hex_lower(bytes: &[u8; 32]) -> String {
    let mut s = String::with_capacity(64);
    for b in bytes {
        s.push(char::from_digit((b >> 4) as u32, 16).unwrap());
        s.push(char::from_digit((b & 0xf) as u32, 16).unwrap());
    }
    s
}

fn hex_decode32(s: &str) -> Option<[u8; 32]> {
    if s.len() != 64 {
        return None;
    }
    let mut out = [0u8; 32];
    let bytes = s.as_bytes();
    for i in 0..32 {
        let hi = (bytes[2 * i] as char).to_digit(16)?;
        let lo = (bytes[2 * i + 1] as char).to_digit(16)?;
        out[i] = ((hi << 4) | lo) as u8;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::to_canonical_bytes;
    use serde_json::json;

    fn draft(contract: &str, op: OpKind, tick: u64, payload: serde_json::Value) -> TxDraft {
        TxDraft {
            contract_id: contract.to_string(),
            op,
            payload: to_canonical_bytes(&payload),
            tick,
            wall_latency_ns: 100_000,
        }
    }

    fn ok_payload() -> serde_json::Value {
        json!({"error": null, "penalties_minor": 0})
    }

    #[test]
    fn genesis_block() {
        let mut ledger = Ledger::new();
        let block = ledger.append(vec![draft("c0", OpKind::Deposit, 0, ok_payload())]);
        assert_eq!(block.height, 0);
        assert_eq!(block.prev_hash, [0u8; 32]);
        assert_eq!(block.txs[0].tx_id, 0);
    }

    #[test]
    fn blocks_chain() {
        let mut ledger = Ledger::new();
        ledger.append(vec![draft("c0", OpKind::Deposit, 0, ok_payload())]);
        ledger.append(vec![draft("c0", OpKind::Confirm, 1, ok_payload())]);
        let blocks = ledger.blocks();
        assert_eq!(blocks[1].prev_hash, blocks[0].block_hash);
        assert_eq!(blocks[1].txs[0].tx_id, 1);
        ledger.verify_chain().unwrap();
    }

    #[test]
    fn identical_appends_hash_identically() {
        let build = || {
            let mut ledger = Ledger::new();
            ledger.append(vec![
                draft(
                    "c0",
                    OpKind::Deposit,
                    0,
                    json!({"amount_minor": 5, "error": null}),
                ),
                draft("c0", OpKind::Confirm, 1, ok_payload()),
            ]);
            ledger.last_block_hash()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn latency_excluded_from_hash() {
        let mut a = Ledger::new();
        let mut b = Ledger::new();
        let mut d1 = draft("c0", OpKind::Deposit, 0, ok_payload());
        let mut d2 = d1.clone();
        d1.wall_latency_ns = 1;
        d2.wall_latency_ns = 999_999;
        a.append(vec![d1]);
        b.append(vec![d2]);
        assert_eq!(a.last_block_hash(), b.last_block_hash());
    }

    #[test]
    fn tamper_is_detected_at_height() {
        let mut ledger = Ledger::new();
        for t in 0..10 {
            ledger.append(vec![draft(
                "c0",
                OpKind::RewardQuery,
                t,
                json!({
                    "error": null, "reward": -1.0, "r_min": -10.0, "r_max": 0.0
                }),
            )]);
        }
        ledger.verify_chain().unwrap();
        // Flip one payload byte at height 7.
        ledger.blocks[7].txs[0].payload[3] ^= 0x01;
        let fault = ledger.verify_chain().unwrap_err();
        assert_eq!(fault.height, 7);
        assert_eq!(fault.kind, FaultKind::BadBlockHash);
    }

    #[test]
    fn truncated_prefix_still_verifies() {
        let mut ledger = Ledger::new();
        for t in 0..5 {
            ledger.append(vec![draft("c0", OpKind::Confirm, t, ok_payload())]);
        }
        ledger.blocks.pop();
        ledger.verify_chain().unwrap();
    }

    #[test]
    fn integrity_examples() {
        let mut ledger = Ledger::new();
        for t in 0..20 {
            ledger.append(vec![draft("c0", OpKind::Confirm, t, ok_payload())]);
        }
        assert_eq!(ledger.integrity_score(20).unwrap(), 1.0);

        let mut faulted = Ledger::new();
        for t in 0..50u64 {
            let payload = if t == 24 {
                json!({"error": "WrongState", "penalties_minor": 0})
            } else {
                ok_payload()
            };
            faulted.append(vec![draft("c0", OpKind::Confirm, t, payload)]);
        }
        assert!((faulted.integrity_score(50).unwrap() - 0.98).abs() < 1e-12);

        let mut all_bad = Ledger::new();
        for t in 0..5 {
            all_bad.append(vec![draft(
                "c0",
                OpKind::Settle,
                t,
                json!({"error": "WrongState"}),
            )]);
        }
        assert_eq!(all_bad.integrity_score(5).unwrap(), 0.0);
        assert_eq!(
            Ledger::new().integrity_score(5),
            Err(LedgerError::EmptyWindow)
        );
    }

    #[test]
    fn penalty_monotonicity_checked_per_contract() {
        let mut ledger = Ledger::new();
        ledger.append(vec![draft(
            "a",
            OpKind::Penalty,
            0,
            json!({"error": null, "penalties_minor": 100}),
        )]);
        // A different contract at zero is fine...
        ledger.append(vec![draft(
            "b",
            OpKind::Penalty,
            1,
            json!({"error": null, "penalties_minor": 0}),
        )]);
        // ...but contract `a` dropping below its running maximum is not.
        ledger.append(vec![draft(
            "a",
            OpKind::Penalty,
            2,
            json!({"error": null, "penalties_minor": 50}),
        )]);
        assert!((ledger.integrity_score(3).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn latency_stats_examples() {
        let mut ledger = Ledger::new();
        let mut d = draft("c0", OpKind::Deposit, 0, ok_payload());
        d.wall_latency_ns = 100_000; // 100 us
        ledger.append(vec![d]);
        let stats = ledger.latency_stats().unwrap();
        assert_eq!(stats.mean_s, 100e-6);
        assert_eq!(stats.stddev_s, 0.0);
        assert_eq!(stats.p99_s, 100e-6);

        let mut d2 = draft("c0", OpKind::Confirm, 1, ok_payload());
        d2.wall_latency_ns = 300_000;
        ledger.append(vec![d2]);
        let stats = ledger.latency_stats().unwrap();
        assert!((stats.mean_s - 200e-6).abs() < 1e-15);

        assert_eq!(Ledger::new().latency_stats(), Err(LedgerError::EmptyLedger));
    }

    #[test]
    fn jsonl_round_trip_preserves_hashes() {
        let mut ledger = Ledger::new();
        for t in 0..4 {
            ledger.append(vec![draft(
                "c0",
                OpKind::RewardQuery,
                t,
                json!({
                    "error": null, "reward": -2.25, "r_min": -10.0, "r_max": 0.0
                }),
            )]);
        }
        let text = ledger.to_jsonl();
        let reloaded = Ledger::from_jsonl(&text).unwrap();
        reloaded.verify_chain().unwrap();
        assert_eq!(reloaded.blocks(), ledger.blocks());
        assert_eq!(reloaded.to_jsonl(), text);
    }

    #[test]
    fn empty_jsonl_is_a_valid_chain() {
        let ledger = Ledger::from_jsonl("").unwrap();
        assert_eq!(ledger.height(), 0);
        ledger.verify_chain().unwrap();
    }
}
