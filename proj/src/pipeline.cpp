// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "ape/contracts.hpp"
#include "ape/interpreter.hpp"

namespace ape
{
const char* outcome_kind_name(OutcomeKind k)
{
    switch (k)
    {
    case OutcomeKind::Naive: return "naive";
    case OutcomeKind::Ape: return "ape";
    case OutcomeKind::Abort: return "abort";
    }
    return "?";
}

const char* abort_cause_name(AbortCause c)
{
    switch (c)
    {
    case AbortCause::None: return "none";
    case AbortCause::VictimFailed: return "victim-failed";
    case AbortCause::NotProfitable: return "not-profitable";
    case AbortCause::Misalignment: return "misalignment";
    case AbortCause::BiBranch: return "bi-branch";
    case AbortCause::AssetContract: return "asset-contract";
    case AbortCause::SynthesisFailed: return "synthesis-failed";
    case AbortCause::ValidationFailed: return "validation-failed";
    case AbortCause::Unprofitable: return "unprofitable";
    case AbortCause::FaultInjected: return "fault-injected";
    }
    return "?";
}

namespace
{
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

class StepTimer
{
public:
    StepTimer(std::map<std::string, double>& sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(Clock::now())
    {}
    ~StepTimer() { sink_[name_] = std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    std::map<std::string, double>& sink_;
    std::string name_;
    Clock::time_point start_;
};

Bytes replace_address_in_data(const Bytes& data, const Address& from, const Address& to)
{
    Bytes out = data;
    if (out.size() < 20)
        return out;
    for (size_t i = 0; i + 20 <= out.size(); ++i)
    {
        if (std::equal(from.bytes.begin(), from.bytes.end(), out.begin() + i))
        {
            std::copy(to.bytes.begin(), to.bytes.end(), out.begin() + i);
            i += 19;
        }
    }
    return out;
}

struct TxReceipt
{
    ExecutionResult result;
    Word fee = 0;
};

// executes one adversary transaction on the fork and tallies cost
TxReceipt apply_adversary_tx(WorldState& fork, const Transaction& tx, const GasTable& gas,
                             AttackOutcome& outcome)
{
    TxReceipt rc;
    rc.result = execute_transaction(fork, tx, gas);
    rc.fee = Word{rc.result.gas_used} * tx.gas_price;
    outcome.gas_cost_e += rc.fee;
    outcome.gas_used += rc.result.gas_used;
    outcome.attack_transactions.push_back(tx);
    return rc;
}

// exchanges every token the adversary gained since `tokens_before` on the
// fixture pools; unpooled tokens are simply held
void exchange_gains(WorldState& fork, const StateFixture& fixture, const Address& adversary,
                    const std::map<Address, Word>& tokens_before, const Word& gas_price,
                    const GasTable& gas, AttackOutcome& outcome)
{
    for (const auto& [token, layout] : fixture.token_layouts)
    {
        (void)layout;
        Word before = 0;
        if (auto it = tokens_before.find(token); it != tokens_before.end())
            before = it->second;
        Word now = token_balance_of(fork, fixture, token, adversary);
        if (now <= before)
            continue;
        Word gained = now - before;
        const AmmPool* pool = fixture.pool_for(token);
        if (!pool)
            continue;

        Transaction approve;
        approve.sender = adversary;
        approve.to = token;
        approve.data = [&] {
            Bytes d;
            uint32_t sel = canned::selector("approve(address,uint256)");
            d.push_back(sel >> 24);
            d.push_back(sel >> 16);
            d.push_back(sel >> 8);
            d.push_back(sel);
            auto spender = to_bytes32(word_from_address(pool->pool));
            d.insert(d.end(), spender.begin(), spender.end());
            auto amt = to_bytes32(gained);
            d.insert(d.end(), amt.begin(), amt.end());
            return d;
        }();
        approve.gas_limit = 200'000;
        approve.gas_price = gas_price;
        approve.nonce = fork.nonce_of(adversary);
        apply_adversary_tx(fork, approve, gas, outcome);

        Transaction sell;
        sell.sender = adversary;
        sell.to = pool->pool;
        sell.data = [&] {
            Bytes d;
            uint32_t sel = canned::selector("sellToken(uint256)");
            d.push_back(sel >> 24);
            d.push_back(sel >> 16);
            d.push_back(sel >> 8);
            d.push_back(sel);
            auto amt = to_bytes32(gained);
            d.insert(d.end(), amt.begin(), amt.end());
            return d;
        }();
        sell.gas_limit = 500'000;
        sell.gas_price = gas_price;
        sell.nonce = fork.nonce_of(adversary);
        apply_adversary_tx(fork, sell, gas, outcome);
    }
}

std::map<Address, Word> token_balances(const WorldState& state, const StateFixture& fixture,
                                       const Address& account)
{
    std::map<Address, Word> out;
    for (const auto& [token, layout] : fixture.token_layouts)
    {
        (void)layout;
        out[token] = token_balance_of(state, fixture, token, account);
    }
    return out;
}

struct StepArtifacts
{
    std::optional<TraceResult> trace;
    std::optional<ProfitReport> profit;
    std::optional<TaintReport> taint;
    std::optional<PatchPlan> plan;
    std::vector<SynthesizedContract> synths;
    uint64_t synth_base_nonce = 0;
    bool degrade_to_naive = false;
    AbortCause abort = AbortCause::None;
    std::string abort_detail;
    std::map<std::string, double> timings_s;
};

// steps 1 through 5; never touches the caller's state
StepArtifacts run_analysis(const StateFixture& fixture, const Transaction& tx_v,
                           const Address& adversary, const PipelineOptions& opts)
{
    StepArtifacts art;
    auto fault = [&](int step) {
        if (opts.fault_step == step)
        {
            art.abort = AbortCause::FaultInjected;
            art.abort_detail = "fault injected at step " + std::to_string(step);
            return true;
        }
        return false;
    };

    {
        StepTimer t(art.timings_s, "dcfg");
        if (fault(1))
            return art;
        try
        {
            art.trace = build_dcfg(fixture.state, tx_v, opts.gas);
        }
        catch (const VictimExecutionFailed& e)
        {
            art.abort = AbortCause::VictimFailed;
            art.abort_detail = e.what();
            return art;
        }
    }

    {
        StepTimer t(art.timings_s, "profitability");
        if (fault(2))
            return art;
        art.profit = analyze_profitability(art.trace->dcfg, art.trace->exec, fixture, tx_v,
                                           &art.trace->post_state);
        if (!art.profit->proceed)
        {
            art.abort = AbortCause::NotProfitable;
            art.abort_detail = "no beneficiary the adversary could capture";
            return art;
        }
    }

    {
        StepTimer t(art.timings_s, "taint");
        if (fault(3))
            return art;
        Transaction tx_c = naive_candidate(fixture, tx_v, adversary);
        try
        {
            art.taint = taint_replay(fixture.state, tx_c, art.trace->dcfg, opts.gas, opts.taint);
        }
        catch (const TraceMisalignment& e)
        {
            art.abort = AbortCause::Misalignment;
            art.abort_detail = e.what();
            return art;
        }
        if (!art.taint->aligned_ok)
        {
            art.abort = AbortCause::Misalignment;
            art.abort_detail = art.taint->divergence;
            return art;
        }
    }

    // nothing tainted and nobody but the sender profits: the naive
    // imitation is already the full attack
    bool non_sender_beneficiary = false;
    for (const Address& b : art.profit->beneficiaries)
    {
        const Account* acc = fixture.state.find(b);
        if (b != tx_v.sender && acc && !acc->code.empty())
            non_sender_beneficiary = true;
    }
    if (art.taint->tainted_blocks.empty() && !non_sender_beneficiary)
    {
        art.degrade_to_naive = true;
        return art;
    }

    {
        StepTimer t(art.timings_s, "patch");
        if (fault(4))
            return art;
        art.plan = identify_patch_set(*art.taint, *art.profit, art.trace->dcfg, fixture, tx_v);
        if (art.plan->abort != PatchAbort::None)
        {
            switch (art.plan->abort)
            {
            case PatchAbort::AssetContract: art.abort = AbortCause::AssetContract; break;
            case PatchAbort::BiBranch: art.abort = AbortCause::BiBranch; break;
            default: art.abort = AbortCause::Misalignment; break;
            }
            art.abort_detail = art.plan->abort_detail;
            return art;
        }
        if (art.plan->replace_set.empty())
        {
            art.degrade_to_naive = true;
            return art;
        }
    }

    {
        StepTimer t(art.timings_s, "synthesis");
        if (fault(5))
            return art;
        art.synth_base_nonce = fixture.state.nonce_of(adversary);
        try
        {
            art.synths = synthesize(*art.plan, art.trace->dcfg, *art.taint, *art.profit, fixture,
                                    adversary, art.synth_base_nonce);
        }
        catch (const BiBranchBlock& e)
        {
            art.abort = AbortCause::BiBranch;
            art.abort_detail = e.what();
            return art;
        }
        catch (const SynthesisError& e)
        {
            art.abort = AbortCause::SynthesisFailed;
            art.abort_detail = e.what();
            return art;
        }
    }

    return art;
}

AttackOutcome abort_outcome(const StepArtifacts& art)
{
    AttackOutcome o;
    o.kind = OutcomeKind::Abort;
    o.abort_cause = art.abort;
    o.abort_detail = art.abort_detail;
    o.timings_s = art.timings_s;
    return o;
}

Word victim_fee(const StateFixture& fixture, const Transaction& tx_v, const GasTable& gas,
                const ExecutionResult* known)
{
    if (known)
        return Word{known->gas_used} * tx_v.gas_price;
    WorldState fork = fixture.state;
    ExecutionResult r = execute_transaction(fork, tx_v, gas);
    return Word{r.gas_used} * tx_v.gas_price;
}

// shared tail of both strategies: execute the candidate, exchange gains,
// settle the books
void validate_candidate(AttackOutcome& outcome, WorldState& fork, const StateFixture& fixture,
                        const Transaction& tx_c, const Address& adversary,
                        const Word& opportunity, const PipelineOptions& opts)
{
    Word bal0 = fork.balance_of(adversary);
    std::map<Address, Word> tokens0 = token_balances(fork, fixture, adversary);

    TxReceipt rc = apply_adversary_tx(fork, tx_c, opts.gas, outcome);
    if (rc.result.status != TxStatus::Success)
    {
        outcome.kind = OutcomeKind::Abort;
        outcome.abort_cause = AbortCause::ValidationFailed;
        outcome.abort_detail =
            std::string("imitation execution failed: ") + tx_error_name(rc.result.error);
        return;
    }

    exchange_gains(fork, fixture, adversary, tokens0, tx_c.gas_price, opts.gas, outcome);

    outcome.opportunity_cost_e = opts.charge_opportunity_cost ? opportunity : Word{0};
    SignedWei delta = SignedWei(fork.balance_of(adversary)) - SignedWei(bal0);
    outcome.net_profit_e = delta - SignedWei(outcome.opportunity_cost_e);
    SignedWei gross = delta + SignedWei(outcome.gas_cost_e);
    outcome.revenue_e = gross >= 0 ? Word(gross) : Word{0};
    outcome.tx_c = tx_c;

    if (outcome.net_profit_e <= 0)
    {
        outcome.kind = OutcomeKind::Abort;
        outcome.abort_cause = AbortCause::Unprofitable;
        outcome.abort_detail = "net profit " + outcome.net_profit_e.str() + " wei";
        outcome.attack_transactions.clear();
    }
}
}  // namespace

Transaction naive_candidate(const StateFixture& fixture, const Transaction& tx_v,
                            const Address& adversary)
{
    Transaction tx_c = tx_v;
    tx_c.sender = adversary;
    tx_c.nonce = fixture.state.nonce_of(adversary);
    tx_c.data = replace_address_in_data(tx_v.data, tx_v.sender, adversary);
    return tx_c;
}

AttackOutcome naive_imitate(const StateFixture& fixture, const Transaction& tx_v,
                            const Address& adversary, const PipelineOptions& opts)
{
    AttackOutcome outcome;
    StepTimer t(outcome.timings_s, "naive");

    WorldState probe = fixture.state;
    ExecutionResult victim = execute_transaction(probe, tx_v, opts.gas);
    if (victim.status != TxStatus::Success)
    {
        outcome.abort_cause = AbortCause::VictimFailed;
        outcome.abort_detail = tx_error_name(victim.error);
        return outcome;
    }
    Word opportunity = Word{victim.gas_used} * tx_v.gas_price;

    Transaction tx_c = naive_candidate(fixture, tx_v, adversary);
    WorldState fork = fixture.state;
    validate_candidate(outcome, fork, fixture, tx_c, adversary, opportunity, opts);
    if (outcome.kind != OutcomeKind::Abort || outcome.abort_cause == AbortCause::None)
        outcome.kind = OutcomeKind::Naive;
    return outcome;
}

AttackOutcome ape_attack(const StateFixture& fixture, const Transaction& tx_v,
                         const Address& adversary, const PipelineOptions& opts)
{
    StepArtifacts art = run_analysis(fixture, tx_v, adversary, opts);
    if (art.abort != AbortCause::None)
        return abort_outcome(art);

    Word opportunity =
        victim_fee(fixture, tx_v, opts.gas, art.trace ? &art.trace->exec : nullptr);

    if (art.degrade_to_naive)
    {
        AttackOutcome outcome;
        outcome.timings_s = art.timings_s;
        {
            StepTimer t(outcome.timings_s, "validation");
            Transaction tx_c = naive_candidate(fixture, tx_v, adversary);
            WorldState fork = fixture.state;
            validate_candidate(outcome, fork, fixture, tx_c, adversary, opportunity, opts);
        }
        if (outcome.kind != OutcomeKind::Abort || outcome.abort_cause == AbortCause::None)
            outcome.kind = OutcomeKind::Naive;
        return outcome;
    }

    AttackOutcome outcome;
    outcome.timings_s = art.timings_s;
    outcome.deployments = art.synths;

    StepTimer t(outcome.timings_s, "validation");
    if (opts.fault_step == 6)
    {
        outcome.kind = OutcomeKind::Abort;
        outcome.abort_cause = AbortCause::FaultInjected;
        outcome.abort_detail = "fault injected at step 6";
        return outcome;
    }

    WorldState fork = fixture.state;

    // deploy every replacement through ordinary creation transactions
    std::map<Address, Address> replacement;
    for (const SynthesizedContract& sc : art.synths)
        replacement[sc.victim] = sc.deployed;

    for (const SynthesizedContract& sc : art.synths)
    {
        Transaction deploy;
        deploy.sender = adversary;
        deploy.to = std::nullopt;
        deploy.data = deployment_init_code(
            BytesView{sc.runtime_code.data(), sc.runtime_code.size()}, sc.storage_init);
        deploy.gas_limit = 4'000'000;
        deploy.gas_price = tx_v.gas_price;
        deploy.nonce = fork.nonce_of(adversary);

        TxReceipt rc = apply_adversary_tx(fork, deploy, opts.gas, outcome);
        const Account* deployed = fork.find(sc.deployed);
        if (rc.result.status != TxStatus::Success || deployed == nullptr ||
            deployed->code != sc.runtime_code)
        {
            outcome.kind = OutcomeKind::Abort;
            outcome.abort_cause = AbortCause::ValidationFailed;
            outcome.abort_detail = "replacement deployment failed for " + to_hex(sc.victim);
            outcome.attack_transactions.clear();
            return outcome;
        }
    }

    Transaction tx_c = naive_candidate(fixture, tx_v, adversary);
    tx_c.nonce = fork.nonce_of(adversary);
    tx_c.gas_limit = tx_v.gas_limit + 400'000;  // headroom for the sweep
    if (art.plan->tx_to_redirect && tx_c.to)
    {
        auto it = replacement.find(*tx_c.to);
        if (it != replacement.end())
            tx_c.to = it->second;
    }
    for (const PatchPlan::CalldataRewrite& rw : art.plan->calldata_rewrites)
    {
        auto rep = replacement.find(rw.victim);
        if (rep == replacement.end())
            continue;
        if (rw.offset_known && rw.offset + 20 <= tx_c.data.size() &&
            std::equal(rw.victim.bytes.begin(), rw.victim.bytes.end(),
                       tx_c.data.begin() + rw.offset))
        {
            std::copy(rep->second.bytes.begin(), rep->second.bytes.end(),
                      tx_c.data.begin() + rw.offset);
        }
        else
        {
            tx_c.data = replace_address_in_data(tx_c.data, rw.victim, rep->second);
        }
    }

    validate_candidate(outcome, fork, fixture, tx_c, adversary, opportunity, opts);
    if (outcome.kind != OutcomeKind::Abort || outcome.abort_cause == AbortCause::None)
        outcome.kind = OutcomeKind::Ape;
    return outcome;
}

MempoolResult simulate_mempool(const MempoolSim& sim, const Address& adversary,
                               const PipelineOptions& opts)
{
    MempoolResult res;
    Clock::time_point start = Clock::now();

    // nonce filtering: per sender, keep only the consecutive run that starts
    // at the account nonce
    std::map<Address, std::vector<size_t>> by_sender;
    for (size_t i = 0; i < sim.pending.size(); ++i)
        by_sender[sim.pending[i].sender].push_back(i);

    std::vector<size_t> admitted;
    std::set<size_t> dropped;
    for (auto& [sender, idxs] : by_sender)
    {
        std::stable_sort(idxs.begin(), idxs.end(), [&](size_t a, size_t b) {
            return sim.pending[a].nonce < sim.pending[b].nonce;
        });
        uint64_t expect = sim.fixture.state.nonce_of(sender);
        for (size_t idx : idxs)
        {
            if (sim.pending[idx].nonce == expect)
            {
                admitted.push_back(idx);
                ++expect;
            }
            else
            {
                dropped.insert(idx);
            }
        }
    }
    res.filtered_out.assign(dropped.begin(), dropped.end());

    // descending gas price; stable so equal prices keep arrival order
    std::stable_sort(admitted.begin(), admitted.end(), [&](size_t a, size_t b) {
        return sim.pending[a].gas_price > sim.pending[b].gas_price;
    });

    std::vector<AttackOutcome> parallel_outcomes(sim.pending.size());
    if (sim.parallel)
    {
        // victim-only chain of intermediate states, then one evaluation per
        // candidate on its own snapshot
        std::vector<WorldState> states;
        states.reserve(admitted.size());
        WorldState s = sim.fixture.state;
        for (size_t idx : admitted)
        {
            states.push_back(s);
            execute_transaction(s, sim.pending[idx], opts.gas);
        }
        std::vector<std::thread> workers;
        for (size_t k = 0; k < admitted.size(); ++k)
        {
            workers.emplace_back([&, k] {
                StateFixture fx = sim.fixture;
                fx.state = states[k];
                parallel_outcomes[admitted[k]] =
                    ape_attack(fx, sim.pending[admitted[k]], adversary, opts);
            });
        }
        for (auto& w : workers)
            w.join();
    }

    StateFixture current = sim.fixture;
    for (size_t idx : admitted)
    {
        const Transaction& tx_v = sim.pending[idx];

        CandidateMetric metric;
        metric.pending_index = idx;
        metric.t0_s = seconds_since(start);
        AttackOutcome outcome = sim.parallel ? std::move(parallel_outcomes[idx])
                                             : ape_attack(current, tx_v, adversary, opts);
        metric.t1_s = seconds_since(start);
        metric.mempool_margin_s = sim.block_arrival_s - metric.t1_s;

        bool attacked = false;
        if (outcome.kind != OutcomeKind::Abort &&
            res.block_gas_used + outcome.gas_used <= sim.block_gas_limit &&
            !outcome.attack_transactions.empty())
        {
            // replace the victim with the attack transactions
            bool applied = true;
            WorldState checkpoint = current.state;
            uint64_t gas_before = res.block_gas_used;
            size_t pushed = 0;
            for (const Transaction& tx : outcome.attack_transactions)
            {
                ExecutionResult r = execute_transaction(current.state, tx, opts.gas);
                if (r.status != TxStatus::Success ||
                    res.block_gas_used + r.gas_used > sim.block_gas_limit)
                {
                    applied = false;
                    break;
                }
                res.block_gas_used += r.gas_used;
                res.block.push_back(tx);
                ++pushed;
            }
            if (applied)
            {
                attacked = true;
            }
            else
            {
                current.state = std::move(checkpoint);
                res.block.resize(res.block.size() - pushed);
                res.block_gas_used = gas_before;
            }
        }

        if (!attacked)
        {
            WorldState checkpoint = current.state;
            ExecutionResult r = execute_transaction(current.state, tx_v, opts.gas);
            if (r.status != TxStatus::HaltError &&
                res.block_gas_used + r.gas_used <= sim.block_gas_limit)
            {
                res.block_gas_used += r.gas_used;
                res.block.push_back(tx_v);
            }
            else
            {
                current.state = std::move(checkpoint);  // does not fit or invalid
            }
        }

        metric.attacked = attacked;
        res.metrics.push_back(metric);
        res.outcomes.push_back(std::move(outcome));
    }

    return res;
}

Summary report(const std::vector<AttackOutcome>& outcomes)
{
    Summary s;
    for (const AttackOutcome& o : outcomes)
    {
        switch (o.kind)
        {
        case OutcomeKind::Naive: ++s.naive_count; break;
        case OutcomeKind::Ape: ++s.ape_count; break;
        case OutcomeKind::Abort: ++s.abort_count; break;
        }
        if (o.kind != OutcomeKind::Abort)
            s.total_profit_e += o.net_profit_e;
        for (const auto& [step, secs] : o.timings_s)
            s.step_samples_s[step].push_back(secs);
        for (const SynthesizedContract& sc : o.deployments)
            s.size_reductions_pct.push_back(sc.reduction.percent());
    }
    return s;
}

namespace
{
struct Stats
{
    double mean = 0, stddev = 0, max = 0, min = 0;
};

Stats stats_of(const std::vector<double>& xs)
{
    Stats st;
    if (xs.empty())
        return st;
    double sum = 0;
    st.max = xs[0];
    st.min = xs[0];
    for (double x : xs)
    {
        sum += x;
        st.max = std::max(st.max, x);
        st.min = std::min(st.min, x);
    }
    st.mean = sum / xs.size();
    double var = 0;
    for (double x : xs)
        var += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(var / xs.size());
    return st;
}

const char* kStepOrder[] = {"dcfg",  "profitability", "taint",
                            "patch", "synthesis",     "validation"};
}  // namespace

std::string Summary::to_json_text() const
{
    using nlohmann::json;
    json j;
    j["counts"] =
        json{{"naive", naive_count}, {"ape", ape_count}, {"abort", abort_count}};
    j["totalProfitWei"] = total_profit_e.str();
    json steps = json::object();
    for (const char* step : kStepOrder)
    {
        auto it = step_samples_s.find(step);
        if (it == step_samples_s.end())
            continue;
        Stats st = stats_of(it->second);
        steps[step] = json{{"meanS", st.mean},
                           {"stdS", st.stddev},
                           {"maxS", st.max},
                           {"minS", st.min},
                           {"samples", it->second.size()}};
    }
    for (const auto& [step, samples] : step_samples_s)
    {
        if (!steps.contains(step))
        {
            Stats st = stats_of(samples);
            steps[step] = json{{"meanS", st.mean},
                               {"stdS", st.stddev},
                               {"maxS", st.max},
                               {"minS", st.min},
                               {"samples", samples.size()}};
        }
    }
    j["stepTimings"] = steps;
    if (!size_reductions_pct.empty())
    {
        Stats st = stats_of(size_reductions_pct);
        j["sizeReductionPct"] = json{{"mean", st.mean},
                                     {"std", st.stddev},
                                     {"max", st.max},
                                     {"min", st.min},
                                     {"samples", size_reductions_pct.size()}};
    }
    return j.dump(2) + "\n";
}

std::string Summary::to_text() const
{
    char buf[160];
    std::string out;
    out += "outcomes: naive=" + std::to_string(naive_count) +
           " ape=" + std::to_string(ape_count) + " abort=" + std::to_string(abort_count) + "\n";
    out += "total profit (wei): " + total_profit_e.str() + "\n";
    out += "step                 mean (s)    std (s)     max (s)     min (s)\n";
    for (const char* step : kStepOrder)
    {
        auto it = step_samples_s.find(step);
        if (it == step_samples_s.end())
            continue;
        Stats st = stats_of(it->second);
        std::snprintf(buf, sizeof(buf), "%-18s %10.6f %10.6f %11.6f %11.6f\n", step, st.mean,
                      st.stddev, st.max, st.min);
        out += buf;
    }
    if (!size_reductions_pct.empty())
    {
        Stats st = stats_of(size_reductions_pct);
        std::snprintf(buf, sizeof(buf),
                      "size reduction %%:  mean=%.2f std=%.2f max=%.2f min=%.2f\n", st.mean,
                      st.stddev, st.max, st.min);
        out += buf;
    }
    return out;
}

std::string AttackOutcome::to_json_text() const
{
    using nlohmann::json;
    json j;
    j["kind"] = outcome_kind_name(kind);
    if (kind == OutcomeKind::Abort)
    {
        j["abortCause"] = abort_cause_name(abort_cause);
        j["abortDetail"] = abort_detail;
    }
    if (tx_c)
        j["txC"] = json::parse(transaction_to_json_text(*tx_c));
    json deps = json::array();
    for (const SynthesizedContract& sc : deployments)
    {
        json d;
        d["victimAddress"] = to_hex(sc.victim);
        d["deployedAddress"] = to_hex(sc.deployed);
        d["runtimeCode"] = to_hex(BytesView{sc.runtime_code.data(), sc.runtime_code.size()});
        json storage = json::object();
        for (const auto& [slot, value] : sc.storage_init)
            storage[to_hex32(slot)] = to_hex32(value);
        d["storageInit"] = storage;
        json sweeps = json::array();
        for (const Address& a : sc.sweep_assets)
            sweeps.push_back(to_hex(a));
        d["sweepAssets"] = sweeps;
        d["sweepNative"] = sc.sweep_native;
        d["sizeReductionPct"] = sc.reduction.percent();
        json rewrites = json::object();
        for (const auto& [from, to] : sc.address_rewrites)
            rewrites[to_hex(from)] = to_hex(to);
        d["addressRewrites"] = rewrites;
        deps.push_back(d);
    }
    j["deployments"] = deps;
    json txs = json::array();
    for (const Transaction& tx : attack_transactions)
        txs.push_back(json::parse(transaction_to_json_text(tx)));
    j["attackTransactions"] = txs;
    j["revenueWei"] = to_hex(revenue_e);
    j["gasCostWei"] = to_hex(gas_cost_e);
    j["opportunityCostWei"] = to_hex(opportunity_cost_e);
    j["netProfitWei"] = net_profit_e.str();
    j["gasUsed"] = gas_used;
    json timings = json::object();
    for (const auto& [step, secs] : timings_s)
        timings[step] = secs;
    j["timingsS"] = timings;
    return j.dump(2) + "\n";
}

AttackOutcome outcome_from_json_text(const std::string& text, const std::string& origin)
{
    using nlohmann::json;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw SchemaError(origin + ": not a JSON outcome");
    AttackOutcome o;
    std::string kind = j.value("kind", "abort");
    o.kind = kind == "naive"  ? OutcomeKind::Naive
             : kind == "ape" ? OutcomeKind::Ape
                             : OutcomeKind::Abort;
    if (j.contains("netProfitWei") && j["netProfitWei"].is_string())
        o.net_profit_e = SignedWei(j["netProfitWei"].get<std::string>());
    if (j.contains("timingsS") && j["timingsS"].is_object())
        for (auto it = j["timingsS"].begin(); it != j["timingsS"].end(); ++it)
            o.timings_s[it.key()] = it.value().get<double>();
    if (j.contains("deployments") && j["deployments"].is_array())
    {
        for (const auto& d : j["deployments"])
        {
            SynthesizedContract sc;
            if (d.contains("sizeReductionPct"))
            {
                double pct = d["sizeReductionPct"].get<double>();
                sc.reduction.numerator = SignedWei(static_cast<long long>(pct * 100.0));
                sc.reduction.denominator = 100;
            }
            o.deployments.push_back(std::move(sc));
        }
    }
    return o;
}

std::string MempoolResult::to_json_text() const
{
    using nlohmann::json;
    json j;
    json block_j = json::array();
    for (const Transaction& tx : block)
        block_j.push_back(json::parse(transaction_to_json_text(tx)));
    j["block"] = block_j;
    j["blockGasUsed"] = block_gas_used;
    json outs = json::array();
    for (const AttackOutcome& o : outcomes)
        outs.push_back(json::parse(o.to_json_text()));
    j["outcomes"] = outs;
    json mets = json::array();
    for (const CandidateMetric& m : metrics)
        mets.push_back(json{{"pendingIndex", m.pending_index},
                            {"t0S", m.t0_s},
                            {"t1S", m.t1_s},
                            {"singleTxS", m.t1_s - m.t0_s},
                            {"attacked", m.attacked},
                            {"mempoolMarginS", m.mempool_margin_s}});
    j["metrics"] = mets;
    j["filteredOut"] = filtered_out;
    return j.dump(2) + "\n";
}

}  // namespace ape
