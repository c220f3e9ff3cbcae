#pragma once

#include "cftc/cft.hpp"
#include "cftc/component.hpp"
#include "cftc/environment.hpp"
#include "cftc/equivalence.hpp"
#include "cftc/error.hpp"
#include "cftc/formula.hpp"
#include "cftc/parallel.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace cftc {

/// Enumeration bounds of the checker.
///
/// - `trace_depth`: longest erroneous trace considered.
/// - `env_depth`: environments offer nothing after traces longer than this.
/// - `max_offers`: largest offer set per trace.
/// - `witness_depth`: longest correct-side trace searched as a witness;
///   defaults to `trace_depth + 2 * states`.
struct Bounds
{
    std::size_t trace_depth = 4;
    std::size_t env_depth = 3;
    std::size_t max_offers = 2;
    std::optional<std::size_t> witness_depth;

    [[nodiscard]] std::size_t witness_for( const Component& comp ) const
    {
        return witness_depth.value_or( trace_depth + 2 * comp.state_count() );
    }

    void validate( const Component& comp ) const
    {
        if ( witness_for( comp ) < trace_depth )
            throw Error( "witness depth must not be smaller than trace depth" );
    }

    friend bool operator==( const Bounds&, const Bounds& ) = default;
};

/// Whether the checker insists on a deterministic component.
enum class Precondition { deterministic, any };

struct Counterexample
{
    EnvTable env_f;
    EnvTable env_c;
    Trace trace_f;
    /// Maximal correct-side traces and the index at which their relevant
    /// projection first departs from the one of `trace_f`.
    std::vector<std::pair<Trace, std::size_t>> failed_witnesses;

    friend bool operator==( const Counterexample&, const Counterexample& ) = default;
};

struct Verdict
{
    NegClause clause;
    EventRef output;
    std::optional<Counterexample> counterexample;

    [[nodiscard]] bool correct() const { return !counterexample.has_value(); }
};

inline bool all_correct( const std::vector<Verdict>& verdicts )
{
    return std::all_of( verdicts.begin(), verdicts.end(), []( const Verdict& v ) { return v.correct(); } );
}

/// Accepted traces of `comp` no longer than the environment depth. Tables
/// are keyed by these traces, and the erroneous-environment relation is
/// judged over them.
inline std::vector<Trace> env_universe( const Component& comp, const Bounds& bounds )
{
    auto traces = traces_up_to( comp, bounds.env_depth );
    return { traces.begin(), traces.end() };
}

namespace detail {

inline void require_precondition( const Component& comp, Precondition pre )
{
    if ( pre == Precondition::deterministic && !is_deterministic( comp ) )
        throw Error( "precondition violated: component '" + comp.name() + "' is not deterministic" );
}

/// Is there a trace under `env` of length at most `max_len` whose relevant
/// projection equals `target`? Breadth-first over (trace, states, matched)
/// nodes; once a trace is longer than the environment depth no input can be
/// offered any more, so the trace itself is dropped from the node.
inline bool exists_witness( const Component& comp, const EnvTable& env, const std::vector<MsgClass>& target,
                            const Relation& rel, std::size_t max_len )
{
    struct Node
    {
        Trace trace;
        StateSet states;
        std::size_t matched;
    };
    if ( target.empty() )
        return true;
    std::vector<Node> layer{ { Trace{}, StateSet{ comp.initial() }, 0 } };
    std::set<std::pair<StateSet, std::size_t>> collapsed;
    for ( std::size_t len = 0; len < max_len && !layer.empty(); ++len ) {
        std::vector<Node> next;
        for ( const auto& node : layer ) {
            const bool exact = node.trace.size() == len;
            const OfferSet offered = exact ? env.offers( node.trace ) : OfferSet{};
            for ( const auto& m : enabled( comp, node.states ) ) {
                if ( m.is_input() && !offered.count( m ) )
                    continue;
                std::size_t matched = node.matched;
                if ( auto cls = classify( m, rel ) ) {
                    if ( matched >= target.size() || *cls != target[matched] )
                        continue;
                    ++matched;
                }
                if ( matched == target.size() )
                    return true;
                Node child{ {}, post( comp, node.states, m ), matched };
                if ( exact && len + 1 <= env.depth() ) {
                    child.trace = node.trace;
                    child.trace.push_back( m );
                }
                else if ( !collapsed.emplace( child.states, matched ).second ) {
                    continue;
                }
                next.push_back( std::move( child ) );
            }
        }
        layer = std::move( next );
    }
    return false;
}

/// Maximal traces under `env` up to `max_len`, with the index where their
/// projection first departs from `target`.
inline std::vector<std::pair<Trace, std::size_t>> witness_attempts( const Component& comp, const EnvTable& env,
                                                                    const std::vector<MsgClass>& target,
                                                                    const Relation& rel, std::size_t max_len,
                                                                    std::size_t cap = 8 )
{
    std::vector<std::pair<Trace, std::size_t>> out;
    std::vector<std::pair<Trace, StateSet>> stack{ { Trace{}, StateSet{ comp.initial() } } };
    std::set<Trace> maximal;
    while ( !stack.empty() && maximal.size() < 4 * cap ) {
        auto [t, states] = std::move( stack.back() );
        stack.pop_back();
        bool extended = false;
        if ( t.size() < max_len ) {
            const auto offered = env.offers( t );
            auto msgs = enabled( comp, states );
            for ( auto it = msgs.rbegin(); it != msgs.rend(); ++it ) {
                if ( it->is_input() && !offered.count( *it ) )
                    continue;
                Trace longer = t;
                longer.push_back( *it );
                stack.emplace_back( std::move( longer ), post( comp, states, *it ) );
                extended = true;
            }
        }
        if ( !extended )
            maximal.insert( t );
    }
    for ( const auto& t : maximal ) {
        if ( out.size() >= cap )
            break;
        const auto proj = project( t, rel );
        std::size_t k = 0;
        while ( k < proj.size() && k < target.size() && proj[k] == target[k] )
            ++k;
        out.emplace_back( t, k );
    }
    return out;
}

inline bool cex_less( const Counterexample& a, const Counterexample& b )
{
    return std::make_tuple( dump( a.env_f ), dump( a.env_c ), a.trace_f ) <
           std::make_tuple( dump( b.env_f ), dump( b.env_c ), b.trace_f );
}

/// Two-player search behind the fast checker. The environment pair is
/// reduced to its least form: for every class of traces the correct side
/// offers exactly one representative of the relevant input the erroneous
/// trace takes next, chosen adversarially, and nothing else. The prover
/// tries to build a correct trace with the same relevant projection.
class WitnessGame
{
public:
    WitnessGame( const Component& comp, const Relation& rel, std::vector<Message> relevant, std::size_t env_depth,
                 std::size_t witness_depth )
        : comp_{ comp }, rel_{ rel }, relevant_{ std::move( relevant ) }, env_depth_{ env_depth },
          witness_depth_{ witness_depth }
    {
        for ( const auto& m : relevant_ )
            sigma_.push_back( *classify( m, rel_ ) );
    }

    [[nodiscard]] const std::vector<MsgClass>& sigma() const { return sigma_; }

    /// Candidate offers for the class expected at position `i`.
    [[nodiscard]] std::vector<Message> representatives( std::size_t i ) const
    {
        const auto& cls = sigma_[i];
        if ( cls.value )
            return { in_msg( cls.port, *cls.value ) };
        std::vector<Message> out;
        for ( const auto& v : comp_.find_port( cls.port )->domain )
            out.push_back( in_msg( cls.port, v ) );
        std::sort( out.begin(), out.end() );
        return out;
    }

    [[nodiscard]] bool expects_input( std::size_t i ) const { return i < relevant_.size() && relevant_[i].is_input(); }

    /// Can the prover complete the projection from this node?
    bool prover_wins( std::size_t len, const StateSet& states, std::size_t i )
    {
        if ( i == sigma_.size() )
            return true;
        if ( len >= witness_depth_ || states.empty() )
            return false;
        const auto key = std::make_tuple( states, i, len );
        if ( auto it = memo_.find( key ); it != memo_.end() )
            return it->second;

        bool win = false;
        const auto msgs = enabled( comp_, states );
        for ( const auto& m : msgs ) {
            if ( m.is_input() )
                continue;
            std::size_t next = i;
            if ( auto cls = classify( m, rel_ ) ) {
                if ( *cls != sigma_[i] )
                    continue;
                ++next;
            }
            if ( prover_wins( len + 1, post( comp_, states, m ), next ) ) {
                win = true;
                break;
            }
        }
        if ( !win && expects_input( i ) && len <= env_depth_ )
            win = !adversary_choice( len, states, i, msgs ).has_value();
        memo_.emplace( key, win );
        return win;
    }

    /// A representative the prover cannot continue from, if there is one.
    std::optional<Message> adversary_choice( std::size_t len, const StateSet& states, std::size_t i )
    {
        return adversary_choice( len, states, i, enabled( comp_, states ) );
    }

private:
    std::optional<Message> adversary_choice( std::size_t len, const StateSet& states, std::size_t i,
                                             const std::vector<Message>& msgs )
    {
        for ( const auto& r : representatives( i ) ) {
            if ( !std::binary_search( msgs.begin(), msgs.end(), r ) )
                return r;
            if ( !prover_wins( len + 1, post( comp_, states, r ), i + 1 ) )
                return r;
        }
        return std::nullopt;
    }

    const Component& comp_;
    const Relation& rel_;
    std::vector<Message> relevant_;
    std::vector<MsgClass> sigma_;
    std::size_t env_depth_;
    std::size_t witness_depth_;
    std::map<std::tuple<StateSet, std::size_t, std::size_t>, bool> memo_;
};

/// Does the least environment that lets `t` through stay within
/// `max_offers` at every prefix?
inline bool fits_offer_bound( const Trace& t, const Relation& rel, std::size_t max_offers )
{
    std::vector<char> relevant( t.size() );
    for ( std::size_t k = 0; k < t.size(); ++k )
        relevant[k] = !msg_irrelevant( t[k], rel );
    for ( std::size_t k = 0; k < t.size(); ++k ) {
        if ( !t[k].is_input() )
            continue;
        std::size_t need = 1;
        if ( !relevant[k] ) {
            std::size_t j = k;
            while ( j < t.size() && !relevant[j] )
                ++j;
            if ( j < t.size() && t[j].is_input() )
                ++need;
        }
        if ( need > max_offers )
            return false;
    }
    return true;
}

} // namespace detail

/// Re-checks a counterexample against the definitions: both tables are
/// valid environments, they form an erroneous pair, the erroneous trace is
/// communicable and no equivalent correct trace exists within the witness
/// depth. Returns the first failed condition, or nullopt.
inline std::optional<std::string> verify_counterexample( const Component& comp, const NegClause& clause,
                                                         const EventRef& output, const Bounds& bounds,
                                                         const Counterexample& cex, bool enforce_offer_bound = true )
{
    const auto rel = Relation::by_clause_and_event( clause, output );
    const auto universe = env_universe( comp, bounds );
    if ( enforce_offer_bound &&
         ( cex.env_f.max_offer_count() > bounds.max_offers || cex.env_c.max_offer_count() > bounds.max_offers ) )
        return "offer bound exceeded";
    if ( cex.env_f.depth() > bounds.env_depth || cex.env_c.depth() > bounds.env_depth )
        return "environment bound exceeded";
    if ( !env_valid( cex.env_f, rel, universe ) )
        return "erroneous environment is not a valid environment";
    if ( !env_valid( cex.env_c, rel, universe ) )
        return "correct environment is not a valid environment";
    if ( !envs_erroneous_pair( cex.env_f, cex.env_c, rel, universe ) )
        return "environments do not form an erroneous pair";
    if ( cex.trace_f.size() > bounds.trace_depth )
        return "erroneous trace exceeds trace depth";
    if ( !accepts_under_env( comp, cex.env_f, cex.trace_f ) )
        return "erroneous trace is not communicable under the erroneous environment";
    if ( detail::exists_witness( comp, cex.env_c, project( cex.trace_f, rel ), rel, bounds.witness_for( comp ) ) )
        return "an equivalent correct trace exists";
    return std::nullopt;
}

/// Bounded check of clause correctness.
///
/// Enumerates the erroneous traces up to `trace_depth` that some bounded
/// environment lets through and, for each distinct relevant projection,
/// plays the witness game against the least adversarial correct
/// environment. The reported counterexample is the least one by
/// (erroneous table, correct table, trace) and is re-verified before it is
/// returned.
inline Verdict check_clause( const Component& comp, const NegClause& clause, const EventRef& output,
                             const Bounds& bounds, Precondition pre = Precondition::deterministic )
{
    detail::require_precondition( comp, pre );
    bounds.validate( comp );
    const auto rel = Relation::by_clause_and_event( clause, output );
    const std::size_t witness_depth = bounds.witness_for( comp );
    const auto universe = env_universe( comp, bounds );

    // Erroneous traces grouped by relevant projection.
    std::map<std::vector<MsgClass>, std::pair<std::vector<Message>, std::vector<Trace>>> groups;
    std::vector<std::pair<Trace, StateSet>> stack{ { Trace{}, StateSet{ comp.initial() } } };
    while ( !stack.empty() ) {
        auto [t, states] = std::move( stack.back() );
        stack.pop_back();
        if ( detail::fits_offer_bound( t, rel, bounds.max_offers ) ) {
            Trace relevant = filter_relevant( t, rel );
            auto& group = groups[project( t, rel )];
            if ( group.second.empty() )
                group.first = relevant;
            group.second.push_back( t );
        }
        if ( t.size() >= bounds.trace_depth )
            continue;
        for ( const auto& m : enabled( comp, states ) ) {
            if ( m.is_input() && t.size() > bounds.env_depth )
                continue;
            Trace longer = t;
            longer.push_back( m );
            stack.emplace_back( std::move( longer ), post( comp, states, m ) );
        }
    }

    std::optional<Counterexample> best;
    for ( auto& [sigma, group] : groups ) {
        detail::WitnessGame game( comp, rel, group.first, bounds.env_depth, witness_depth );
        if ( game.prover_wins( 0, StateSet{ comp.initial() }, 0 ) )
            continue;

        // Correct side: adversarial representative wherever the class
        // expects an input next.
        EnvTable env_c( bounds.env_depth );
        for ( const auto& n : universe ) {
            const auto proj = project( n, rel );
            const std::size_t i = proj.size();
            if ( i >= sigma.size() || !std::equal( proj.begin(), proj.end(), sigma.begin() ) || !game.expects_input( i ) )
                continue;
            auto choice = game.adversary_choice( n.size(), states_after( comp, n ), i );
            env_c.add_offer( n, choice ? *choice : game.representatives( i ).front() );
        }

        for ( const auto& t : group.second ) {
            const Trace relevant = filter_relevant( t, rel );
            Counterexample cex{ EnvTable( bounds.env_depth ), env_c, t, {} };
            for ( const auto& n : universe ) {
                const auto proj = project( n, rel );
                const std::size_t i = proj.size();
                if ( i < sigma.size() && std::equal( proj.begin(), proj.end(), sigma.begin() ) &&
                     game.expects_input( i ) )
                    cex.env_f.add_offer( n, relevant[i] );
            }
            Trace prefix;
            for ( const auto& m : t ) {
                if ( m.is_input() && msg_irrelevant( m, rel ) )
                    cex.env_f.add_offer( prefix, m );
                prefix.push_back( m );
            }
            if ( !best || detail::cex_less( cex, *best ) )
                best = std::move( cex );
        }
    }

    Verdict verdict{ clause, output, std::nullopt };
    if ( best ) {
        best->failed_witnesses =
            detail::witness_attempts( comp, best->env_c, project( best->trace_f, rel ), rel,
                                      std::min( witness_depth, bounds.trace_depth + 2 ) );
        if ( auto failure = verify_counterexample( comp, clause, output, bounds, *best ) )
            throw Error( "internal error: counterexample failed re-verification: " + *failure );
        verdict.counterexample = std::move( best );
    }
    return verdict;
}

/// Naive transcription of clause correctness over the same bounded family:
/// every valid table pair, every erroneous trace, every correct trace. Only
/// usable on very small instances.
inline Verdict check_clause_oracle( const Component& comp, const NegClause& clause, const EventRef& output,
                                    const Bounds& bounds, Precondition pre = Precondition::deterministic )
{
    detail::require_precondition( comp, pre );
    bounds.validate( comp );
    const auto rel = Relation::by_clause_and_event( clause, output );
    const auto universe = env_universe( comp, bounds );

    std::vector<EnvTable> envs;
    for_each_environment( universe, comp.input_alphabet(), bounds.env_depth, bounds.max_offers, rel,
                          [&]( const EnvTable& env ) {
                              envs.push_back( env );
                              return true;
                          } );
    const auto erroneous_traces = traces_up_to( comp, bounds.trace_depth );
    const auto correct_traces = traces_up_to( comp, bounds.witness_for( comp ) );

    std::vector<std::optional<std::vector<Trace>>> under( envs.size() );
    auto traces_under = [&]( std::size_t k ) -> const std::vector<Trace>& {
        if ( !under[k] ) {
            under[k].emplace();
            for ( const auto& t : correct_traces )
                if ( accepts_under_env( comp, envs[k], t ) )
                    under[k]->push_back( t );
        }
        return *under[k];
    };

    std::optional<Counterexample> best;
    for ( const auto& env_f : envs ) {
        std::vector<Trace> candidates;
        for ( const auto& t : erroneous_traces )
            if ( accepts_under_env( comp, env_f, t ) )
                candidates.push_back( t );
        for ( std::size_t k = 0; k < envs.size(); ++k ) {
            if ( !envs_erroneous_pair( env_f, envs[k], rel, universe ) )
                continue;
            for ( const auto& t_f : candidates ) {
                const auto& correct = traces_under( k );
                const bool matched = std::any_of( correct.begin(), correct.end(),
                                                  [&]( const Trace& t_c ) { return trace_equiv( t_f, t_c, rel ); } );
                if ( matched )
                    continue;
                Counterexample cex{ env_f, envs[k], t_f, {} };
                if ( !best || detail::cex_less( cex, *best ) )
                    best = std::move( cex );
            }
        }
    }
    return { clause, output, std::move( best ) };
}

/// Clause-by-clause check of a CFT.
inline std::vector<Verdict> check_cft( const Component& comp, const CFT& cft, const Bounds& bounds,
                                       Precondition pre = Precondition::deterministic, std::size_t jobs = 1 )
{
    detail::require_precondition( comp, pre );
    const auto cls = clauses( cft );
    return parallel_map(
        cls.size(), [&]( std::size_t i ) { return check_clause( comp, cls[i], cft.output, bounds, pre ); }, jobs );
}

/// Counterexample simplification: strips the correct side down to one
/// relevant offer per equivalent prefix of the erroneous trace and the
/// erroneous side down to the inputs that trace actually needs. The result
/// is re-verified; failure means the construction did not preserve the
/// counterexample.
inline Counterexample simplify_counterexample( const Component& comp, const Counterexample& cex, const Relation& rel,
                                               const Bounds& bounds )
{
    if ( rel.kind() != Relation::Kind::by_clause_and_event )
        throw Error( "simplification needs a clause and an output event" );
    const auto& t1 = cex.trace_f;

    std::set<Trace> keys;
    for ( const auto& t : env_universe( comp, bounds ) )
        keys.insert( t );
    for ( const auto& [t, o] : cex.env_f.entries() )
        keys.insert( t );
    for ( const auto& [t, o] : cex.env_c.entries() )
        keys.insert( t );

    auto irrelevant_part = [&]( const OfferSet& offers ) {
        OfferSet out;
        for ( const auto& m : offers )
            if ( msg_irrelevant( m, rel ) )
                out.insert( m );
        return out;
    };

    Counterexample out{ EnvTable( bounds.env_depth ), EnvTable( bounds.env_depth ), t1, {} };
    for ( const auto& t : keys ) {
        if ( t.size() > bounds.env_depth )
            continue;
        // Correct side without irrelevant offers.
        OfferSet stripped;
        for ( const auto& m : cex.env_c.offers( t ) )
            if ( !msg_irrelevant( m, rel ) )
                stripped.insert( m );

        OfferSet next_inputs;
        for ( std::size_t k = 0; k < t1.size(); ++k ) {
            const Trace prefix( t1.begin(), t1.begin() + static_cast<std::ptrdiff_t>( k ) );
            if ( t1[k].is_input() && !msg_irrelevant( t1[k], rel ) && trace_equiv( t, prefix, rel ) )
                next_inputs.insert( t1[k] );
        }

        OfferSet f_offers = irrelevant_part( cex.env_f.offers( t ) );
        f_offers.insert( next_inputs.begin(), next_inputs.end() );
        out.env_f.set_offers( t, std::move( f_offers ) );

        OfferSet c_offers;
        for ( const auto& wanted : next_inputs ) {
            auto it = std::find_if( stripped.begin(), stripped.end(),
                                    [&]( const Message& m ) { return msg_equiv( m, wanted, rel ); } );
            if ( it != stripped.end() )
                c_offers.insert( *it );
        }
        out.env_c.set_offers( t, std::move( c_offers ) );
    }

    const std::size_t witness_depth = bounds.witness_for( comp );
    out.failed_witnesses = detail::witness_attempts( comp, out.env_c, project( t1, rel ), rel,
                                                     std::min( witness_depth, bounds.trace_depth + 2 ) );
    if ( auto failure = verify_counterexample( comp, rel.clause(), *rel.event(), bounds, out, false ) )
        throw Error( "simplification not counterexample-preserving: " + *failure );
    return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string dump_counterexample( const Counterexample& cex, const std::string& indent = "  " )
{
    std::string out;
    out += indent + "trace_f: " + to_string( cex.trace_f ) + "\n";
    out += indent + "env_f:\n" + dump( cex.env_f, indent + "  " );
    out += indent + "env_c:\n" + dump( cex.env_c, indent + "  " );
    for ( const auto& [t, k] : cex.failed_witnesses )
        out += indent + "witness: " + to_string( t ) + " diverges_at=" + std::to_string( k ) + "\n";
    return out;
}

/// Line-oriented form: `VERDICT clause=<clause> result=<correct|refuted>`
/// followed by the indented counterexample dump.
inline std::string machine_report( const Verdict& v )
{
    std::string out = "VERDICT clause=" + to_string( v.clause ) + " result=" + ( v.correct() ? "correct" : "refuted" ) + "\n";
    if ( v.counterexample )
        out += dump_counterexample( *v.counterexample );
    return out;
}

inline std::string text_report( const Verdict& v )
{
    std::string out = "clause " + to_string( v.clause ) + " with output " + to_string( v.output ) + ": " +
                      ( v.correct() ? "correct within bounds" : "refuted" ) + "\n";
    if ( v.counterexample ) {
        out += "  counterexample\n";
        out += dump_counterexample( *v.counterexample, "    " );
    }
    return out;
}

} // namespace cftc
