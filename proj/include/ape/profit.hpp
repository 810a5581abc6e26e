// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "ape/fixtures.hpp"
#include "ape/trace.hpp"

namespace ape
{
using SignedWei = boost::multiprecision::int256_t;

struct AssetTransfer
{
    std::optional<Address> token;  // nullopt = native currency
    Address from{};
    Address to{};
    Word amount = 0;

    bool operator==(const AssetTransfer&) const = default;
};

struct UnknownAssetLayout : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct ProfitReport
{
    std::map<Address, SignedWei> per_account_net;  // valued in native wei
    std::set<Address> beneficiaries;
    SignedWei sender_net = 0;
    bool proceed = false;
    std::set<Address> unpriced_assets;

    std::vector<AssetTransfer> transfers;        // committed flows, execution order
    std::set<Address> event_emitting_assets;     // emitters of standard asset events
    std::vector<std::string> warnings;           // storage-diff cross-check findings

    std::string to_json_text() const;
};

/// Token balance of `account` read through the token's declared storage
/// layout. Throws UnknownAssetLayout for undeclared tokens.
Word token_balance_of(const WorldState& state, const StateFixture& fixture, const Address& token,
                      const Address& account);

/// Balance change of `account` in `asset` caused by applying `tx` to the
/// fixture state (native when `token` is empty; otherwise read through the
/// token's declared storage layout). Works on a scratch copy.
SignedWei balance_delta(const StateFixture& fixture, const Transaction& tx,
                        const Address& account, const std::optional<Address>& token,
                        const GasTable& gas);

/// Committed asset flows of one execution: the top-level value transfer,
/// value-bearing call edges whose frames committed, and token Transfer
/// events from the log.
std::vector<AssetTransfer> extract_transfers(const DCFG& dcfg, const ExecutionResult& exec,
                                             const Transaction& tx_v);

/// Values every flow in native units, nets them per account, and applies
/// the two no-abort rules: the sender is a beneficiary, or the other
/// beneficiaries' collective profit plus the sender's own net stays
/// positive. `post_state`, when given, enables the storage-diff
/// cross-check of log-derived token deltas.
ProfitReport analyze_profitability(const DCFG& dcfg, const ExecutionResult& exec,
                                   const StateFixture& fixture, const Transaction& tx_v,
                                   const WorldState* post_state = nullptr);

}  // namespace ape
