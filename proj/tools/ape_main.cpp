// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ape/assembler.hpp"
#include "ape/contracts.hpp"
#include "ape/interpreter.hpp"
#include "ape/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
struct CommonInputs
{
    std::string state_path;
    std::string tx_path;
    std::string scenario_path;
    std::string adversary_hex;
    std::string gas_table_path;
    bool pretty = false;
};

void add_common(CLI::App* cmd, CommonInputs& in, bool needs_tx = true)
{
    cmd->add_option("--state", in.state_path, "world-state fixture (JSON)");
    if (needs_tx)
        cmd->add_option("--tx", in.tx_path, "victim transaction (JSON)");
    cmd->add_option("--scenario", in.scenario_path,
                    "scenario bundle (JSON); replaces --state/--tx");
    cmd->add_option("--adversary", in.adversary_hex, "adversary address (hex)");
    cmd->add_option("--gas-table", in.gas_table_path, "gas cost table override");
    cmd->add_flag("--pretty", in.pretty, "indent JSON output");
}

ape::PipelineOptions options_for(const CommonInputs& in)
{
    ape::PipelineOptions opts;
    if (!in.gas_table_path.empty())
        opts.gas = ape::GasTable::from_file(in.gas_table_path);
    return opts;
}

struct LoadedCase
{
    ape::StateFixture fixture;
    ape::Transaction tx;
};

LoadedCase load_case(const CommonInputs& in, const ape::GasTable& gas)
{
    LoadedCase out;
    if (!in.scenario_path.empty())
    {
        ape::ScenarioBundle b = ape::load_scenario(in.scenario_path, gas);
        out.fixture = std::move(b.fixture);
        out.tx = b.victim_tx;
        return out;
    }
    if (in.state_path.empty() || in.tx_path.empty())
        throw ape::SchemaError("either --scenario or both --state and --tx are required");
    out.fixture = ape::load_fixture(in.state_path);
    out.tx = ape::load_transaction(in.tx_path);
    return out;
}

ape::Address adversary_of(const CommonInputs& in)
{
    if (in.adversary_hex.empty())
        return ape::canned::adversary();
    return ape::address_from_hex(in.adversary_hex);
}

void emit(const std::string& json_text, bool pretty)
{
    if (pretty)
    {
        std::cout << json_text;
        return;
    }
    json j = json::parse(json_text);
    std::cout << j.dump() << "\n";
}

std::vector<std::string> disasm_lines(ape::BytesView code)
{
    std::vector<std::string> out;
    for (const ape::Instruction& ins : ape::disassemble(code))
        out.push_back(ape::format_instruction(ins));
    return out;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"transaction imitation engine for EVM-style bytecode"};
    app.require_subcommand(1);

    CommonInputs run_in;
    bool naive_only = false;
    bool no_opportunity = false;
    auto* run_cmd = app.add_subcommand("run", "run the full attack pipeline on one transaction");
    add_common(run_cmd, run_in);
    run_cmd->add_flag("--naive-only", naive_only, "only attempt the string-replace baseline");
    run_cmd->add_flag("--no-opportunity-cost", no_opportunity,
                      "exclude the victim fee from the profit bar");

    CommonInputs trace_in;
    auto* trace_cmd = app.add_subcommand("trace", "dump the victim's dynamic control-flow graph");
    add_common(trace_cmd, trace_in);

    CommonInputs taint_in;
    auto* taint_cmd = app.add_subcommand("taint", "dump the forced-replay taint report");
    add_common(taint_cmd, taint_in);

    CommonInputs plan_in;
    auto* plan_cmd = app.add_subcommand("plan", "dump the contract replacement plan");
    add_common(plan_cmd, plan_in);

    CommonInputs synth_in;
    auto* synth_cmd =
        app.add_subcommand("synth-dump", "dump synthesized bytecode and disassembly");
    add_common(synth_cmd, synth_in);

    CommonInputs pool_in;
    std::string pool_path;
    uint64_t pool_gas_limit = 30'000'000;
    double arrival_s = 2.0;
    bool parallel = false;
    auto* pool_cmd = app.add_subcommand("mempool", "simulate block building over a mempool");
    add_common(pool_cmd, pool_in, /*needs_tx=*/false);
    pool_cmd->add_option("--pool", pool_path, "pending transactions (JSON array)")->required();
    pool_cmd->add_option("--gas-limit", pool_gas_limit, "block gas limit");
    pool_cmd->add_option("--arrival", arrival_s, "synthetic next-block arrival (seconds)");
    pool_cmd->add_flag("--parallel", parallel, "evaluate candidates on parallel snapshots");

    std::string report_dir;
    bool report_pretty = false;
    bool report_text = false;
    auto* report_cmd = app.add_subcommand("report", "aggregate saved attack outcomes");
    report_cmd->add_option("--in", report_dir, "directory of outcome JSON files")->required();
    report_cmd->add_flag("--pretty", report_pretty, "indent JSON output");
    report_cmd->add_flag("--text", report_text, "human-readable table instead of JSON");

    std::string scenarios_dir;
    auto* scen_cmd = app.add_subcommand("scenarios", "write the bundled scenario corpus");
    scen_cmd->add_option("--out", scenarios_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run_cmd)
        {
            ape::PipelineOptions opts = options_for(run_in);
            opts.charge_opportunity_cost = !no_opportunity;
            LoadedCase c = load_case(run_in, opts.gas);
            ape::AttackOutcome outcome =
                naive_only ? ape::naive_imitate(c.fixture, c.tx, adversary_of(run_in), opts)
                           : ape::ape_attack(c.fixture, c.tx, adversary_of(run_in), opts);
            emit(outcome.to_json_text(), run_in.pretty);
        }
        else if (*trace_cmd)
        {
            ape::PipelineOptions opts = options_for(trace_in);
            LoadedCase c = load_case(trace_in, opts.gas);
            ape::TraceResult tr = ape::build_dcfg(c.fixture.state, c.tx, opts.gas);
            emit(tr.dcfg.to_json_text(), trace_in.pretty);
        }
        else if (*taint_cmd)
        {
            ape::PipelineOptions opts = options_for(taint_in);
            LoadedCase c = load_case(taint_in, opts.gas);
            ape::TraceResult tr = ape::build_dcfg(c.fixture.state, c.tx, opts.gas);
            ape::Transaction tx_c =
                ape::naive_candidate(c.fixture, c.tx, adversary_of(taint_in));
            ape::TaintReport rep =
                ape::taint_replay(c.fixture.state, tx_c, tr.dcfg, opts.gas, opts.taint);
            emit(rep.to_json_text(), taint_in.pretty);
        }
        else if (*plan_cmd)
        {
            ape::PipelineOptions opts = options_for(plan_in);
            LoadedCase c = load_case(plan_in, opts.gas);
            ape::TraceResult tr = ape::build_dcfg(c.fixture.state, c.tx, opts.gas);
            ape::ProfitReport profit = ape::analyze_profitability(tr.dcfg, tr.exec, c.fixture,
                                                                  c.tx, &tr.post_state);
            ape::Transaction tx_c = ape::naive_candidate(c.fixture, c.tx, adversary_of(plan_in));
            ape::TaintReport taint =
                ape::taint_replay(c.fixture.state, tx_c, tr.dcfg, opts.gas, opts.taint);
            ape::PatchPlan plan =
                ape::identify_patch_set(taint, profit, tr.dcfg, c.fixture, c.tx);
            emit(plan.to_json_text(), plan_in.pretty);
        }
        else if (*synth_cmd)
        {
            ape::PipelineOptions opts = options_for(synth_in);
            LoadedCase c = load_case(synth_in, opts.gas);
            ape::Address adv = adversary_of(synth_in);
            ape::TraceResult tr = ape::build_dcfg(c.fixture.state, c.tx, opts.gas);
            ape::ProfitReport profit = ape::analyze_profitability(tr.dcfg, tr.exec, c.fixture,
                                                                  c.tx, &tr.post_state);
            ape::Transaction tx_c = ape::naive_candidate(c.fixture, c.tx, adv);
            ape::TaintReport taint =
                ape::taint_replay(c.fixture.state, tx_c, tr.dcfg, opts.gas, opts.taint);
            ape::PatchPlan plan =
                ape::identify_patch_set(taint, profit, tr.dcfg, c.fixture, c.tx);
            std::vector<ape::SynthesizedContract> synths;
            if (plan.abort == ape::PatchAbort::None && !plan.replace_set.empty())
                synths = ape::synthesize(plan, tr.dcfg, taint, profit, c.fixture, adv,
                                         c.fixture.state.nonce_of(adv));
            json out;
            out["contracts"] = json::array();
            for (const ape::SynthesizedContract& sc : synths)
            {
                const ape::Account* victim = c.fixture.state.find(sc.victim);
                json e;
                e["victimAddress"] = ape::to_hex(sc.victim);
                e["deployedAddress"] = ape::to_hex(sc.deployed);
                e["runtimeCode"] = ape::to_hex(
                    ape::BytesView{sc.runtime_code.data(), sc.runtime_code.size()});
                e["sizeReductionPct"] = sc.reduction.percent();
                e["victimDisassembly"] = disasm_lines(
                    ape::BytesView{victim->code.data(), victim->code.size()});
                e["synthDisassembly"] = disasm_lines(
                    ape::BytesView{sc.runtime_code.data(), sc.runtime_code.size()});
                out["contracts"].push_back(e);
            }
            if (plan.abort != ape::PatchAbort::None)
                out["abort"] = ape::patch_abort_name(plan.abort);
            emit(out.dump(2) + "\n", synth_in.pretty);
        }
        else if (*pool_cmd)
        {
            ape::PipelineOptions opts = options_for(pool_in);
            if (pool_in.state_path.empty())
                throw ape::SchemaError("--state is required for mempool simulation");
            ape::MempoolSim sim;
            sim.fixture = ape::load_fixture(pool_in.state_path);
            sim.block_gas_limit = pool_gas_limit;
            sim.block_arrival_s = arrival_s;
            sim.parallel = parallel;

            std::ifstream in(pool_path);
            if (!in)
                throw ape::SchemaError("cannot open " + pool_path);
            json pool_json = json::parse(in, nullptr, false);
            if (pool_json.is_discarded() || !pool_json.is_array())
                throw ape::SchemaError(pool_path + ": expected a JSON array of transactions");
            for (const auto& t : pool_json)
                sim.pending.push_back(
                    ape::transaction_from_json_text(t.dump(), pool_path));

            ape::MempoolResult res = ape::simulate_mempool(sim, adversary_of(pool_in), opts);
            emit(res.to_json_text(), pool_in.pretty);
        }
        else if (*report_cmd)
        {
            std::vector<ape::AttackOutcome> outcomes;
            for (const auto& entry : fs::directory_iterator(report_dir))
            {
                if (entry.path().extension() != ".json")
                    continue;
                std::ifstream in(entry.path());
                std::string text((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
                outcomes.push_back(
                    ape::outcome_from_json_text(text, entry.path().string()));
            }
            ape::Summary s = ape::report(outcomes);
            if (report_text)
                std::cout << s.to_text();
            else
                emit(s.to_json_text(), report_pretty);
        }
        else if (*scen_cmd)
        {
            fs::create_directories(scenarios_dir);
            for (const auto& [name, bundle] : ape::canned::all_scenarios())
                ape::save_scenario(bundle, (fs::path(scenarios_dir) / (name + ".json")).string());
            std::cout << "{\"written\":\"" << scenarios_dir << "\"}\n";
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
