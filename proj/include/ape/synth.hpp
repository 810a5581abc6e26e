// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "ape/patch.hpp"

namespace ape
{
struct SynthesisError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};
struct BiBranchBlock : SynthesisError
{
    using SynthesisError::SynthesisError;
};
struct ComputedJumpUnresolved : SynthesisError
{
    using SynthesisError::SynthesisError;
};
struct ZeroLengthVictim : SynthesisError
{
    using SynthesisError::SynthesisError;
};

struct SizeReduction
{
    SignedWei numerator = 0;   // (victim_len - synth_len) * 100
    Word denominator = 1;      // victim_len
    double percent() const
    {
        return 100.0 * (numerator / 100).convert_to<double>() /
               denominator.convert_to<double>();
    }
};

/// (len(victim) - len(synth)) / len(victim) * 100; negative when injected
/// code outgrew what dead-block stripping removed.
SizeReduction size_reduction(BytesView victim_code, BytesView synth_code);

struct SynthesizedContract
{
    Address victim{};
    Address deployed{};  // precomputed from (adversary, nonce)
    Bytes runtime_code;
    std::map<Word, Word> storage_init;
    std::map<Address, Address> address_rewrites;  // victim -> replacement applied inside
    std::vector<Address> sweep_assets;            // tokens forwarded to the adversary
    bool sweep_native = false;
    SizeReduction reduction;

    /// victim block start -> offset of the same block in runtime_code;
    /// blocks absent here (the injected sweep) have no victim counterpart
    std::map<uint64_t, uint64_t> block_offsets;
};

/// Emits replacement bytecode for every member of the plan, in deploy
/// order. Replacement addresses are derived from (adversary, next_nonce+i)
/// up front so members may embed each other's future addresses. Kept code
/// is exactly the victim's executed blocks; tainted branches are pinned to
/// the victim direction with stack-neutral sequences; hard-coded addresses
/// and jump destinations are rewritten, the latter iterated to a fixpoint
/// because a PUSH may need to widen.
std::vector<SynthesizedContract> synthesize(const PatchPlan& plan, const DCFG& dcfg,
                                            const TaintReport& taint,
                                            const ProfitReport& profit,
                                            const StateFixture& fixture,
                                            const Address& adversary, uint64_t next_nonce);

/// Wraps runtime code in constructor code that seeds the storage and
/// returns the runtime, so a replacement deploys through an ordinary
/// creation transaction.
Bytes deployment_init_code(BytesView runtime, const std::map<Word, Word>& storage_init);

}  // namespace ape
