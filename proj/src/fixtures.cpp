// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/fixtures.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ape/interpreter.hpp"

namespace ape
{
using nlohmann::json;

namespace
{
[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw SchemaError(path + ": " + what);
}

const json& member(const json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object())
        fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end())
        fail(path + "." + key, "missing field");
    return *it;
}

std::string get_string(const json& j, const std::string& path)
{
    if (!j.is_string())
        fail(path, "expected a hex string");
    return j.get<std::string>();
}

Word get_word(const json& j, const std::string& path)
{
    try
    {
        return word_from_hex(get_string(j, path));
    }
    catch (const HexError& e)
    {
        fail(path, e.what());
    }
}

uint64_t get_u64(const json& j, const std::string& path)
{
    Word w = get_word(j, path);
    if (w > std::numeric_limits<uint64_t>::max())
        fail(path, "value does not fit in 64 bits");
    return static_cast<uint64_t>(w);
}

Address get_address(const json& j, const std::string& path)
{
    try
    {
        return address_from_hex(get_string(j, path));
    }
    catch (const HexError& e)
    {
        fail(path, e.what());
    }
}

Address key_address(const std::string& key, const std::string& path)
{
    try
    {
        return address_from_hex(key);
    }
    catch (const HexError& e)
    {
        fail(path + "." + key, e.what());
    }
}

Bytes get_bytes(const json& j, const std::string& path)
{
    try
    {
        return from_hex(get_string(j, path));
    }
    catch (const HexError& e)
    {
        fail(path, e.what());
    }
}

Word get_word32(const std::string& s, const std::string& path)
{
    Bytes b;
    try
    {
        b = from_hex(s);
    }
    catch (const HexError& e)
    {
        fail(path, e.what());
    }
    if (b.size() != 32)
        fail(path, "storage words must be 32 bytes, got " + std::to_string(b.size()));
    return word_from_bytes(BytesView{b.data(), b.size()});
}

json parse(const std::string& text, const std::string& origin)
{
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw SchemaError(origin + ": not valid JSON");
    return j;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SchemaError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw SchemaError("cannot write " + path);
    out << text;
}

json block_to_json(const BlockContext& b)
{
    json j;
    j["number"] = to_hex(Word{b.number});
    j["timestamp"] = to_hex(Word{b.timestamp});
    j["coinbase"] = to_hex(b.coinbase);
    j["gasLimit"] = to_hex(Word{b.gas_limit});
    j["chainId"] = to_hex(Word{b.chain_id});
    j["baseGasPrice"] = to_hex(b.base_gas_price);
    return j;
}

BlockContext block_from_json(const json& j, const std::string& path)
{
    BlockContext b;
    b.number = get_u64(member(j, "number", path), path + ".number");
    b.timestamp = get_u64(member(j, "timestamp", path), path + ".timestamp");
    b.coinbase = get_address(member(j, "coinbase", path), path + ".coinbase");
    b.gas_limit = get_u64(member(j, "gasLimit", path), path + ".gasLimit");
    b.chain_id = get_u64(member(j, "chainId", path), path + ".chainId");
    b.base_gas_price = get_word(member(j, "baseGasPrice", path), path + ".baseGasPrice");
    return b;
}

json fixture_to_json(const StateFixture& f)
{
    json accounts = json::object();
    for (const auto& [addr, acc] : f.state.accounts)
    {
        json a;
        a["balance"] = to_hex(acc.balance);
        a["nonce"] = to_hex(Word{acc.nonce});
        a["code"] = to_hex(BytesView{acc.code.data(), acc.code.size()});
        json storage = json::object();
        for (const auto& [slot, value] : acc.storage)
            storage[to_hex32(slot)] = to_hex32(value);
        a["storage"] = storage;
        accounts[to_hex(addr)] = a;
    }

    json j;
    j["accounts"] = accounts;
    j["blockContext"] = block_to_json(f.state.block);

    json prices = json::object();
    for (const auto& [asset, r] : f.price_table)
        prices[to_hex(asset)] = json{{"num", to_hex(r.num)}, {"den", to_hex(r.den)}};
    j["priceTable"] = prices;

    json pools = json::array();
    for (const auto& p : f.amm_pools)
        pools.push_back(json{{"poolAddress", to_hex(p.pool)},
                             {"tokenAddress", to_hex(p.token)},
                             {"reserveToken", to_hex(p.reserve_token)},
                             {"reserveE", to_hex(p.reserve_e)}});
    j["ammPools"] = pools;

    json layouts = json::object();
    for (const auto& [token, l] : f.token_layouts)
        layouts[to_hex(token)] = json{{"balanceSlot", to_hex(l.balance_slot)},
                                      {"allowanceSlot", to_hex(l.allowance_slot)}};
    j["tokenLayouts"] = layouts;
    return j;
}

StateFixture fixture_from_json(const json& j, const std::string& path)
{
    StateFixture f;

    const json& accounts = member(j, "accounts", path);
    if (!accounts.is_object())
        fail(path + ".accounts", "expected an object");
    for (auto it = accounts.begin(); it != accounts.end(); ++it)
    {
        std::string apath = path + ".accounts." + it.key();
        Address addr = key_address(it.key(), path + ".accounts");
        const json& a = it.value();
        Account acc;
        acc.balance = get_word(member(a, "balance", apath), apath + ".balance");
        acc.nonce = get_u64(member(a, "nonce", apath), apath + ".nonce");
        acc.code = get_bytes(member(a, "code", apath), apath + ".code");
        if (auto s = a.find("storage"); s != a.end())
        {
            if (!s->is_object())
                fail(apath + ".storage", "expected an object");
            for (auto st = s->begin(); st != s->end(); ++st)
            {
                Word slot = get_word32(st.key(), apath + ".storage." + st.key());
                Word value = get_word32(get_string(st.value(), apath + ".storage." + st.key()),
                                        apath + ".storage." + st.key());
                if (value != 0)
                    acc.storage[slot] = value;
            }
        }
        f.state.accounts.emplace(addr, std::move(acc));
    }

    f.state.block = block_from_json(member(j, "blockContext", path), path + ".blockContext");

    if (auto p = j.find("priceTable"); p != j.end())
    {
        if (!p->is_object())
            fail(path + ".priceTable", "expected an object");
        for (auto it = p->begin(); it != p->end(); ++it)
        {
            std::string ppath = path + ".priceTable." + it.key();
            Rational r;
            r.num = get_word(member(it.value(), "num", ppath), ppath + ".num");
            r.den = get_word(member(it.value(), "den", ppath), ppath + ".den");
            if (r.den == 0)
                fail(ppath + ".den", "price denominator must be nonzero");
            f.price_table.emplace(key_address(it.key(), path + ".priceTable"), r);
        }
    }

    if (auto p = j.find("ammPools"); p != j.end())
    {
        if (!p->is_array())
            fail(path + ".ammPools", "expected an array");
        for (size_t i = 0; i < p->size(); ++i)
        {
            std::string ppath = path + ".ammPools[" + std::to_string(i) + "]";
            const json& e = (*p)[i];
            AmmPool pool;
            pool.pool = get_address(member(e, "poolAddress", ppath), ppath + ".poolAddress");
            pool.token = get_address(member(e, "tokenAddress", ppath), ppath + ".tokenAddress");
            pool.reserve_token =
                get_word(member(e, "reserveToken", ppath), ppath + ".reserveToken");
            pool.reserve_e = get_word(member(e, "reserveE", ppath), ppath + ".reserveE");
            f.amm_pools.push_back(pool);
        }
    }

    if (auto p = j.find("tokenLayouts"); p != j.end())
    {
        if (!p->is_object())
            fail(path + ".tokenLayouts", "expected an object");
        for (auto it = p->begin(); it != p->end(); ++it)
        {
            std::string ppath = path + ".tokenLayouts." + it.key();
            TokenLayout l;
            l.balance_slot = get_word(member(it.value(), "balanceSlot", ppath),
                                      ppath + ".balanceSlot");
            l.allowance_slot = get_word(member(it.value(), "allowanceSlot", ppath),
                                        ppath + ".allowanceSlot");
            f.token_layouts.emplace(key_address(it.key(), path + ".tokenLayouts"), l);
        }
    }

    return f;
}

json tx_to_json(const Transaction& tx)
{
    json j;
    j["sender"] = to_hex(tx.sender);
    if (tx.to)
        j["to"] = to_hex(*tx.to);
    else
        j["to"] = nullptr;
    j["value"] = to_hex(tx.value);
    j["data"] = to_hex(BytesView{tx.data.data(), tx.data.size()});
    j["gasLimit"] = to_hex(Word{tx.gas_limit});
    j["gasPrice"] = to_hex(tx.gas_price);
    j["nonce"] = to_hex(Word{tx.nonce});
    return j;
}

Transaction tx_from_json(const json& j, const std::string& path)
{
    Transaction tx;
    tx.sender = get_address(member(j, "sender", path), path + ".sender");
    const json& to = member(j, "to", path);
    if (!to.is_null())
        tx.to = get_address(to, path + ".to");
    tx.value = get_word(member(j, "value", path), path + ".value");
    tx.data = get_bytes(member(j, "data", path), path + ".data");
    tx.gas_limit = get_u64(member(j, "gasLimit", path), path + ".gasLimit");
    tx.gas_price = get_word(member(j, "gasPrice", path), path + ".gasPrice");
    tx.nonce = get_u64(member(j, "nonce", path), path + ".nonce");
    return tx;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}
}  // namespace

const char* expected_name(ScenarioBundle::Expected e)
{
    switch (e)
    {
    case ScenarioBundle::Expected::NaiveSucceeds: return "naive-succeeds";
    case ScenarioBundle::Expected::ApeSucceeds: return "ape-succeeds";
    case ScenarioBundle::Expected::Abort: return "abort";
    }
    return "?";
}

StateFixture fixture_from_json_text(const std::string& text, const std::string& origin)
{
    return fixture_from_json(parse(text, origin), origin);
}

StateFixture load_fixture(const std::string& path)
{
    return fixture_from_json_text(read_file(path), path);
}

std::string fixture_to_json_text(const StateFixture& f)
{
    return dump(fixture_to_json(f));
}

void save_fixture(const StateFixture& f, const std::string& path)
{
    write_file(path, fixture_to_json_text(f));
}

Transaction transaction_from_json_text(const std::string& text, const std::string& origin)
{
    return tx_from_json(parse(text, origin), origin);
}

Transaction load_transaction(const std::string& path)
{
    return transaction_from_json_text(read_file(path), path);
}

std::string transaction_to_json_text(const Transaction& tx)
{
    return dump(tx_to_json(tx));
}

void save_transaction(const Transaction& tx, const std::string& path)
{
    write_file(path, transaction_to_json_text(tx));
}

ScenarioBundle scenario_from_json_text(const std::string& text, const GasTable& gas,
                                       const std::string& origin)
{
    json j = parse(text, origin);
    ScenarioBundle b;
    b.fixture = fixture_from_json(member(j, "state", origin), origin + ".state");
    b.victim_tx = tx_from_json(member(j, "victimTx", origin), origin + ".victimTx");

    std::string exp = get_string(member(j, "expectedOutcome", origin), origin + ".expectedOutcome");
    if (exp == "naive-succeeds")
        b.expected = ScenarioBundle::Expected::NaiveSucceeds;
    else if (exp == "ape-succeeds")
        b.expected = ScenarioBundle::Expected::ApeSucceeds;
    else if (exp == "abort")
        b.expected = ScenarioBundle::Expected::Abort;
    else
        fail(origin + ".expectedOutcome", "unknown outcome '" + exp + "'");

    if (auto n = j.find("notes"); n != j.end() && n->is_string())
        b.notes = n->get<std::string>();

    // well-formedness: the victim transaction must succeed on the bundled state
    WorldState probe = b.fixture.state;
    ExecutionResult r = execute_transaction(probe, b.victim_tx, gas);
    if (r.status != TxStatus::Success)
        fail(origin + ".victimTx",
             std::string("victim transaction does not execute on the bundled state: ") +
                 tx_error_name(r.error));

    return b;
}

ScenarioBundle load_scenario(const std::string& path, const GasTable& gas)
{
    return scenario_from_json_text(read_file(path), gas, path);
}

std::string scenario_to_json_text(const ScenarioBundle& b)
{
    json j;
    j["state"] = parse(fixture_to_json_text(b.fixture), "<fixture>");
    j["victimTx"] = parse(transaction_to_json_text(b.victim_tx), "<tx>");
    j["expectedOutcome"] = expected_name(b.expected);
    j["notes"] = b.notes;
    return dump(j);
}

void save_scenario(const ScenarioBundle& b, const std::string& path)
{
    write_file(path, scenario_to_json_text(b));
}

Word amm_output(const Word& amount_in, const Word& reserve_in, const Word& reserve_out)
{
    using u512 = boost::multiprecision::uint512_t;
    u512 fee_adjusted = u512(amount_in) * 997;
    u512 num = fee_adjusted * u512(reserve_out);
    u512 den = u512(reserve_in) * 1000 + fee_adjusted;
    if (den == 0)
        return 0;
    return Word(num / den);
}

std::optional<Word> try_quote_to_native(const Address& asset, const Word& amount,
                                        const StateFixture& fixture)
{
    if (auto it = fixture.price_table.find(asset); it != fixture.price_table.end())
    {
        using u512 = boost::multiprecision::uint512_t;
        return Word(u512(amount) * u512(it->second.num) / u512(it->second.den));
    }
    if (const AmmPool* p = fixture.pool_for(asset))
        return amm_output(amount, p->reserve_token, p->reserve_e);
    return std::nullopt;
}

Word quote_to_native(const Address& asset, const Word& amount, const StateFixture& fixture)
{
    auto q = try_quote_to_native(asset, amount, fixture);
    if (!q)
        throw UnknownAssetError("no price or pool for asset " + to_hex(asset));
    return *q;
}

}  // namespace ape
