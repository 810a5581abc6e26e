// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "ape/synth.hpp"

namespace ape
{
enum class OutcomeKind
{
    Naive,
    Ape,
    Abort,
};

const char* outcome_kind_name(OutcomeKind k);

enum class AbortCause
{
    None,
    VictimFailed,       // step 1: the victim transaction itself fails
    NotProfitable,      // step 2: no exploitable beneficiary
    Misalignment,       // step 3: environmental divergence or broken lockstep
    BiBranch,           // step 4/5: a pinned branch needs both directions
    AssetContract,      // step 4: a replacement member is an asset contract
    SynthesisFailed,    // step 5
    ValidationFailed,   // step 6: imitation execution failed locally
    Unprofitable,       // step 6: executed but did not clear the fee bar
    FaultInjected,      // test hook
};

const char* abort_cause_name(AbortCause c);

struct AttackOutcome
{
    OutcomeKind kind = OutcomeKind::Abort;
    AbortCause abort_cause = AbortCause::None;
    std::string abort_detail;

    std::optional<Transaction> tx_c;
    std::vector<SynthesizedContract> deployments;
    /// Replayable form of the attack: creation transactions in deploy
    /// order followed by the imitation transaction.
    std::vector<Transaction> attack_transactions;

    Word revenue_e = 0;           // gross native inflow
    Word gas_cost_e = 0;          // fees across every adversary transaction
    Word opportunity_cost_e = 0;  // the victim transaction's fee
    SignedWei net_profit_e = 0;
    uint64_t gas_used = 0;        // total across the attack transactions

    std::map<std::string, double> timings_s;  // step name -> seconds

    std::string to_json_text() const;
};

struct PipelineOptions
{
    GasTable gas = GasTable::istanbul_defaults();
    TaintOptions taint;
    bool charge_opportunity_cost = true;
    /// Test hook: force an abort at pipeline step 1..6.
    int fault_step = 0;
};

/// The string-replace baseline: the victim's sender is substituted by the
/// adversary in the sender and data fields, the result is executed on a
/// fork, and any received tokens are exchanged on the fixture pools.
AttackOutcome naive_imitate(const StateFixture& fixture, const Transaction& tx_v,
                            const Address& adversary, const PipelineOptions& opts = {});

/// The transaction the naive strategy would send.
Transaction naive_candidate(const StateFixture& fixture, const Transaction& tx_v,
                            const Address& adversary);

/// Full six-step pipeline. Degrades to the naive imitation when nothing is
/// tainted and the sender is the only beneficiary. All execution happens on
/// forks; an abort leaves no trace anywhere.
AttackOutcome ape_attack(const StateFixture& fixture, const Transaction& tx_v,
                         const Address& adversary, const PipelineOptions& opts = {});

struct MempoolSim
{
    StateFixture fixture;
    std::vector<Transaction> pending;
    uint64_t block_gas_limit = 30'000'000;
    /// Synthetic next-block arrival, seconds after simulation start.
    double block_arrival_s = 2.0;
    /// Evaluate candidates on precomputed victim-chain states in parallel
    /// instead of sequentially on the evolving block state.
    bool parallel = false;
};

struct CandidateMetric
{
    size_t pending_index = 0;
    double t0_s = 0;  // evaluation start, relative to simulation start
    double t1_s = 0;  // attack generation finished
    bool attacked = false;
    double mempool_margin_s = 0;  // block arrival minus t1
};

struct MempoolResult
{
    std::vector<Transaction> block;
    uint64_t block_gas_used = 0;
    std::vector<AttackOutcome> outcomes;       // one per evaluated candidate
    std::vector<CandidateMetric> metrics;
    std::vector<size_t> filtered_out;          // pending indexes dropped by nonce filtering

    std::string to_json_text() const;
};

/// Nonce-filters and gas-price-sorts the pool, then walks it like a block
/// builder: each candidate is attacked on the current intermediate state;
/// a successful attack replaces the victim transaction, everything else is
/// applied as-is, all subject to the block gas limit.
MempoolResult simulate_mempool(const MempoolSim& sim, const Address& adversary,
                               const PipelineOptions& opts = {});

/// Aggregates outcome counts, profit totals, per-step timing and size
/// reduction statistics.
struct Summary
{
    size_t naive_count = 0;
    size_t ape_count = 0;
    size_t abort_count = 0;
    SignedWei total_profit_e = 0;
    std::map<std::string, std::vector<double>> step_samples_s;
    std::vector<double> size_reductions_pct;

    std::string to_json_text() const;
    std::string to_text() const;  // human-readable table
};

Summary report(const std::vector<AttackOutcome>& outcomes);

/// Parses the fields report() needs back out of a serialized outcome.
AttackOutcome outcome_from_json_text(const std::string& text, const std::string& origin);

}  // namespace ape
