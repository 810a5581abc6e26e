// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ape/gas.hpp"
#include "ape/state.hpp"

namespace ape
{
struct SchemaError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};
struct UnknownAssetError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Price of one smallest unit of an asset, in native wei.
struct Rational
{
    Word num = 0;
    Word den = 1;

    bool operator==(const Rational&) const = default;
};

struct AmmPool
{
    Address pool{};
    Address token{};
    Word reserve_token = 0;
    Word reserve_e = 0;

    bool operator==(const AmmPool&) const = default;
};

/// Storage layout of a token contract: solidity-style mappings rooted at
/// these slots. balanceOf(a) lives at keccak(a32 ++ balance_slot32).
struct TokenLayout
{
    Word balance_slot = 0;
    Word allowance_slot = 1;

    bool operator==(const TokenLayout&) const = default;
};

struct StateFixture
{
    WorldState state;
    std::map<Address, Rational> price_table;
    std::vector<AmmPool> amm_pools;
    std::map<Address, TokenLayout> token_layouts;

    bool operator==(const StateFixture&) const = default;

    const AmmPool* pool_for(const Address& token) const
    {
        for (const auto& p : amm_pools)
            if (p.token == token)
                return &p;
        return nullptr;
    }
};

struct ScenarioBundle
{
    enum class Expected
    {
        NaiveSucceeds,
        ApeSucceeds,
        Abort,
    };

    StateFixture fixture;
    Transaction victim_tx;
    Expected expected = Expected::Abort;
    std::string notes;
};

const char* expected_name(ScenarioBundle::Expected e);

// JSON wire format (see docs/fixture-format.md). Load validates field by
// field and reports the offending key path in SchemaError. Saving after
// loading is canonical: sorted keys, lowercase hex, fixed-width storage
// words.
StateFixture load_fixture(const std::string& path);
StateFixture fixture_from_json_text(const std::string& text, const std::string& origin = "<text>");
std::string fixture_to_json_text(const StateFixture& f);
void save_fixture(const StateFixture& f, const std::string& path);

Transaction load_transaction(const std::string& path);
Transaction transaction_from_json_text(const std::string& text,
                                       const std::string& origin = "<text>");
std::string transaction_to_json_text(const Transaction& tx);
void save_transaction(const Transaction& tx, const std::string& path);

/// Scenario well-formedness requires the victim transaction to execute
/// successfully on the bundled state, so loading needs a gas schedule.
ScenarioBundle load_scenario(const std::string& path, const GasTable& gas);
ScenarioBundle scenario_from_json_text(const std::string& text, const GasTable& gas,
                                       const std::string& origin = "<text>");
std::string scenario_to_json_text(const ScenarioBundle& b);
void save_scenario(const ScenarioBundle& b, const std::string& path);

/// Values `amount` of `asset` in native wei: price-table entry when one
/// exists, otherwise the constant-product output against the fixture pool
/// (0.3% fee, floor division). Throws UnknownAssetError when neither is
/// declared.
Word quote_to_native(const Address& asset, const Word& amount, const StateFixture& fixture);
std::optional<Word> try_quote_to_native(const Address& asset, const Word& amount,
                                        const StateFixture& fixture);

/// The constant-product leg on its own: amount_in * 997 * reserve_out /
/// (reserve_in * 1000 + amount_in * 997), floored.
Word amm_output(const Word& amount_in, const Word& reserve_in, const Word& reserve_out);

}  // namespace ape
