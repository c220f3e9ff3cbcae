#pragma once

#include "cftc/component.hpp"
#include "cftc/equivalence.hpp"
#include "cftc/error.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cftc {

using OfferSet = std::set<Message>;

/// Finite environment: maps traces of length at most `depth` to the set of
/// inputs offered after observing them. Unlisted traces offer nothing.
class EnvTable
{
public:
    EnvTable() = default;
    explicit EnvTable( std::size_t depth ) : depth_{ depth } {}

    [[nodiscard]] std::size_t depth() const { return depth_; }
    [[nodiscard]] const std::map<Trace, OfferSet>& entries() const { return map_; }

    void set_offers( const Trace& t, OfferSet offers )
    {
        if ( t.size() > depth_ )
            throw Error( "environment bound exceeded: trace '" + to_string( t ) + "' is longer than depth " +
                         std::to_string( depth_ ) );
        for ( const auto& m : offers )
            if ( !m.is_input() )
                throw Error( "environment offers non-input '" + to_string( m ) + "'" );
        if ( offers.empty() )
            map_.erase( t );
        else
            map_[t] = std::move( offers );
    }

    void add_offer( const Trace& t, const Message& m )
    {
        auto current = offers( t );
        current.insert( m );
        set_offers( t, std::move( current ) );
    }

    [[nodiscard]] OfferSet offers( const Trace& t ) const
    {
        if ( t.size() > depth_ )
            return {};
        auto it = map_.find( t );
        return it == map_.end() ? OfferSet{} : it->second;
    }

    [[nodiscard]] std::size_t max_offer_count() const
    {
        std::size_t n = 0;
        for ( const auto& [t, o] : map_ )
            n = std::max( n, o.size() );
        return n;
    }

    friend bool operator==( const EnvTable&, const EnvTable& ) = default;

private:
    std::size_t depth_ = 0;
    std::map<Trace, OfferSet> map_;
};

inline OfferSet offers( const EnvTable& env, const Trace& t )
{
    return env.offers( t );
}

inline std::string to_string( const OfferSet& offers )
{
    std::string out = "{";
    bool first = true;
    for ( const auto& m : offers ) {
        if ( !first )
            out += ",";
        first = false;
        out += to_string( m );
    }
    return out + "}";
}

/// One line per non-empty entry, `<trace> : {<offers>}`, in canonical order.
inline std::string dump( const EnvTable& env, const std::string& indent = "" )
{
    std::string out;
    for ( const auto& [t, o] : env.entries() )
        out += indent + to_string( t ) + " : " + to_string( o ) + "\n";
    return out;
}

/// The component can communicate `t` and every input of `t` was offered by
/// the environment after the prefix preceding it.
inline bool accepts_under_env( const Component& comp, const EnvTable& env, const Trace& t )
{
    Trace prefix;
    for ( const auto& m : t ) {
        if ( m.is_input() && !env.offers( prefix ).count( m ) )
            return false;
        prefix.push_back( m );
    }
    return accepts_trace( comp, t );
}

/// Every trace over `alphabet` of length at most `bound`.
inline std::vector<Trace> all_traces( const std::vector<Message>& alphabet, std::size_t bound )
{
    std::vector<Trace> out{ Trace{} };
    std::size_t layer_begin = 0;
    for ( std::size_t len = 0; len < bound; ++len ) {
        const std::size_t layer_end = out.size();
        for ( std::size_t i = layer_begin; i < layer_end; ++i )
            for ( const auto& m : alphabet ) {
                Trace t = out[i];
                t.push_back( m );
                out.push_back( std::move( t ) );
            }
        layer_begin = layer_end;
    }
    std::sort( out.begin(), out.end() );
    return out;
}

/// Erroneous-environment relation between `erroneous` and `correct`,
/// quantifying over the pairs of equivalent traces drawn from `universe`.
/// Condition (1) and (2) are transcribed literally: irrelevance is judged
/// under `rel`, matching under the clause part of `rel`.
inline bool envs_erroneous_pair( const EnvTable& erroneous, const EnvTable& correct, const Relation& rel,
                                 const std::vector<Trace>& universe )
{
    const Relation matching = rel.clause_only();
    auto covered = [&]( const OfferSet& from, const OfferSet& into ) {
        for ( const auto& m : from ) {
            if ( msg_irrelevant( m, rel ) )
                continue;
            const bool matched =
                std::any_of( into.begin(), into.end(), [&]( const Message& u ) { return msg_equiv( m, u, matching ); } );
            if ( !matched )
                return false;
        }
        return true;
    };
    for ( const auto& t1 : universe ) {
        const auto correct_offers = correct.offers( t1 );
        for ( const auto& t2 : universe ) {
            if ( !trace_equiv( t1, t2, rel ) )
                continue;
            const auto erroneous_offers = erroneous.offers( t2 );
            if ( !covered( correct_offers, erroneous_offers ) || !covered( erroneous_offers, correct_offers ) )
                return false;
        }
    }
    return true;
}

/// Same relation with the quantification bounded to traces over `alphabet`
/// of length at most `trace_bound`.
inline bool envs_erroneous_pair( const EnvTable& erroneous, const EnvTable& correct, const Relation& rel,
                                 const std::vector<Message>& alphabet, std::size_t trace_bound )
{
    if ( rel.kind() != Relation::Kind::by_clause_and_event )
        throw Error( "erroneous-environment relation needs a clause and an output event" );
    if ( trace_bound > erroneous.depth() || trace_bound > correct.depth() )
        throw Error( "bound mismatch: trace bound " + std::to_string( trace_bound ) + " exceeds table depth" );
    return envs_erroneous_pair( erroneous, correct, rel, all_traces( alphabet, trace_bound ) );
}

inline bool env_valid( const EnvTable& env, const Relation& rel, const std::vector<Trace>& universe )
{
    return envs_erroneous_pair( env, env, rel, universe );
}

inline bool env_valid( const EnvTable& env, const Relation& rel, const std::vector<Message>& alphabet,
                       std::size_t trace_bound )
{
    return envs_erroneous_pair( env, env, rel, alphabet, trace_bound );
}

/// Subsets of `items` with at most `max_size` elements, ordered by size and
/// then lexicographically.
inline std::vector<OfferSet> bounded_subsets( const std::vector<Message>& items, std::size_t max_size )
{
    std::vector<OfferSet> out{ OfferSet{} };
    std::vector<std::vector<std::size_t>> layer{ {} };
    for ( std::size_t size = 1; size <= max_size && size <= items.size(); ++size ) {
        std::vector<std::vector<std::size_t>> next;
        for ( const auto& pick : layer ) {
            const std::size_t from = pick.empty() ? 0 : pick.back() + 1;
            for ( std::size_t i = from; i < items.size(); ++i ) {
                auto extended = pick;
                extended.push_back( i );
                OfferSet set;
                for ( auto k : extended )
                    set.insert( items[k] );
                out.push_back( std::move( set ) );
                next.push_back( std::move( extended ) );
            }
        }
        layer = std::move( next );
    }
    return out;
}

/// Enumerates every table keyed by the traces of `keys` no longer than
/// `depth`, offering at most `max_offers` messages of `inputs` per trace,
/// that is a valid environment for `rel` (validity judged over the same
/// keys). Calls `visit` in a fixed odometer order; stops early when `visit`
/// returns false.
template <typename Visitor>
void for_each_environment( const std::vector<Trace>& keys, const std::vector<Message>& inputs, std::size_t depth,
                           std::size_t max_offers, const Relation& rel, Visitor&& visit,
                           std::size_t limit = 50'000'000 )
{
    std::vector<Trace> slots;
    for ( const auto& t : keys )
        if ( t.size() <= depth )
            slots.push_back( t );
    std::sort( slots.begin(), slots.end() );
    slots.erase( std::unique( slots.begin(), slots.end() ), slots.end() );

    std::vector<Message> offerable;
    for ( const auto& m : inputs )
        if ( m.is_input() )
            offerable.push_back( m );
    std::sort( offerable.begin(), offerable.end() );
    offerable.erase( std::unique( offerable.begin(), offerable.end() ), offerable.end() );
    const auto choices = bounded_subsets( offerable, max_offers );

    double total = 1.0;
    for ( std::size_t i = 0; i < slots.size(); ++i )
        total *= static_cast<double>( choices.size() );
    if ( total > static_cast<double>( limit ) )
        throw Error( "environment family too large to enumerate" );

    std::vector<std::size_t> digit( slots.size(), 0 );
    while ( true ) {
        EnvTable env( depth );
        for ( std::size_t i = 0; i < slots.size(); ++i )
            env.set_offers( slots[i], choices[digit[i]] );
        if ( env_valid( env, rel, slots ) && !visit( std::as_const( env ) ) )
            return;
        std::size_t i = slots.size();
        while ( i > 0 ) {
            --i;
            if ( ++digit[i] < choices.size() )
                break;
            digit[i] = 0;
            if ( i == 0 )
                return;
        }
        if ( slots.empty() )
            return;
    }
}

/// All valid tables over traces of `alphabet` up to `depth`; offers are
/// drawn from the inputs of `alphabet`.
inline std::vector<EnvTable> enumerate_environments( const std::vector<Message>& alphabet, std::size_t depth,
                                                     std::size_t max_offers, const Relation& rel )
{
    std::vector<EnvTable> out;
    for_each_environment( all_traces( alphabet, depth ), alphabet, depth, max_offers, rel, [&]( const EnvTable& env ) {
        out.push_back( env );
        return true;
    } );
    return out;
}

} // namespace cftc
