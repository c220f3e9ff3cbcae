#pragma once

#include "cftc/cft.hpp"
#include "cftc/checker.hpp"
#include "cftc/component.hpp"
#include "cftc/error.hpp"
#include "cftc/formula.hpp"
#include "cftc/model.hpp"
#include "cftc/parallel.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cftc {

/// Component `c` consumes the outputs of component `d` on `connections`.
struct SystemSpec
{
    std::string name;
    Component c;
    Component d;
    std::vector<std::string> connections;
    CFT cft_c;
    Binding cfts_d;
    Bounds bounds;
};

/// Checks the structural invariants of a system.
inline void validate_system( const SystemSpec& spec )
{
    for ( const auto& port : spec.connections ) {
        const auto* in = spec.c.find_port( port );
        const auto* out = spec.d.find_port( port );
        if ( in == nullptr || out == nullptr || in->direction != Direction::in || out->direction != Direction::out ||
             in->domain != out->domain )
            throw Error( "connection mismatch on port '" + port + "'" );
    }
    validate_cft( spec.cft_c, spec.c );
    for ( const auto& [event, cft] : spec.cfts_d ) {
        if ( std::find( spec.connections.begin(), spec.connections.end(), event.port ) == spec.connections.end() )
            throw Error( "bound event '" + to_string( event ) + "' is not on a connected port" );
        validate_cft( cft, spec.d );
    }
    for ( const auto& event : spec.cft_c.formula.events() )
        if ( std::find( spec.connections.begin(), spec.connections.end(), event.port ) != spec.connections.end() &&
             !spec.cfts_d.count( event ) )
            throw Error( "unbound connected event '" + to_string( event ) + "'" );
}

inline SystemSpec system_spec( const Model& model, const std::string& name, const Bounds& bounds = {} )
{
    const auto& decl = model.system( name );
    SystemSpec spec{ decl.name,       model.component( decl.c ), model.component( decl.d ), decl.connections,
                     model.cft( decl.check ), {},                bounds };
    for ( const auto& [event, cft] : decl.bindings )
        spec.cfts_d.emplace( event, model.cft( cft ) );
    validate_system( spec );
    return spec;
}

inline Component composite_of( const SystemSpec& spec )
{
    return compose_components( spec.c, spec.d, spec.connections );
}

inline CFT composed_cft( const SystemSpec& spec, bool strict )
{
    const std::string owner = spec.c.name() + "_" + spec.d.name();
    return strict ? compose_strict( spec.cft_c, spec.cfts_d, spec.connections, owner )
                  : compose( spec.cft_c, spec.cfts_d, spec.connections, owner );
}

enum class TheoremStatus { premises_failed, validated, violation };

inline std::string to_string( TheoremStatus s )
{
    switch ( s ) {
    case TheoremStatus::premises_failed:
        return "PremisesFailed";
    case TheoremStatus::validated:
        return "Validated";
    case TheoremStatus::violation:
        return "VIOLATION";
    }
    return "";
}

struct TheoremReport
{
    std::string system;
    std::vector<Verdict> premise_c;
    std::map<EventRef, std::vector<Verdict>> premise_d;
    CFT composed;
    CFT composed_strict;
    /// Present only when every premise holds.
    std::optional<std::vector<Verdict>> conclusion;
    std::optional<std::vector<Verdict>> strict_conclusion;
    TheoremStatus status = TheoremStatus::premises_failed;
    bool composite_deterministic = true;
    std::size_t blocked_handshakes = 0;

    [[nodiscard]] bool premises_hold() const
    {
        if ( !all_correct( premise_c ) )
            return false;
        return std::all_of( premise_d.begin(), premise_d.end(),
                            []( const auto& entry ) { return all_correct( entry.second ); } );
    }

    /// Premises hold but the strict composition is refuted on the composite.
    [[nodiscard]] bool strict_violation() const { return strict_conclusion && !all_correct( *strict_conclusion ); }
};

/// Checks the premises on `c` and `d` and, when they hold, both composed
/// CFTs on the composite. The composite is checked without the determinism
/// precondition because interleaving usually breaks it.
inline TheoremReport validate_theorem_instance( const SystemSpec& spec, std::size_t jobs = 1 )
{
    TheoremReport report{ spec.name, {}, {}, composed_cft( spec, false ), composed_cft( spec, true ), {}, {},
                          TheoremStatus::premises_failed, true, 0 };
    report.premise_c = check_cft( spec.c, spec.cft_c, spec.bounds, Precondition::deterministic, jobs );
    for ( const auto& [event, cft] : spec.cfts_d )
        report.premise_d.emplace( event, check_cft( spec.d, cft, spec.bounds, Precondition::deterministic, jobs ) );
    const auto composite = composite_of( spec );
    report.composite_deterministic = is_deterministic( composite );
    report.blocked_handshakes = count_blocked_handshakes( spec.c, spec.d, spec.connections );
    if ( !report.premises_hold() )
        return report;

    report.conclusion = check_cft( composite, report.composed, spec.bounds, Precondition::any, jobs );
    report.strict_conclusion = check_cft( composite, report.composed_strict, spec.bounds, Precondition::any, jobs );
    report.status = all_correct( *report.conclusion ) ? TheoremStatus::validated : TheoremStatus::violation;
    return report;
}

inline std::string format_report( const TheoremReport& r )
{
    std::string out = "SYSTEM " + r.system + " status=" + to_string( r.status ) + " strict=" +
                      ( !r.strict_conclusion ? "unjudged" : all_correct( *r.strict_conclusion ) ? "correct" : "refuted" ) +
                      " composite_deterministic=" + ( r.composite_deterministic ? "yes" : "no" ) +
                      " blocked_handshakes=" + std::to_string( r.blocked_handshakes ) + "\n";
    auto section = [&]( const std::string& title, const std::vector<Verdict>& verdicts ) {
        out += title + "\n";
        for ( const auto& v : verdicts )
            out += machine_report( v );
    };
    section( "PREMISE c", r.premise_c );
    for ( const auto& [event, verdicts] : r.premise_d )
        section( "PREMISE d " + to_string( event ), verdicts );
    out += "COMPOSED " + to_string( r.composed.formula ) + "\n";
    out += "COMPOSED_STRICT " + to_string( r.composed_strict.formula ) + "\n";
    if ( r.conclusion )
        section( "CONCLUSION", *r.conclusion );
    if ( r.strict_conclusion )
        section( "STRICT_CONCLUSION", *r.strict_conclusion );
    return out;
}

struct TransferResult
{
    std::size_t counterexamples = 0;
    std::size_t transferred = 0;

    [[nodiscard]] bool holds() const { return counterexamples == transferred; }
};

/// Does every counterexample against a clause of the non-strict composed
/// CFT also refute some clause of the strict composed CFT?
inline TransferResult transfer_counterexamples( const SystemSpec& spec, const std::vector<Verdict>& conclusion )
{
    const auto composite = composite_of( spec );
    const auto strict = composed_cft( spec, true );
    const auto strict_clauses = clauses( strict );
    TransferResult result;
    for ( const auto& v : conclusion ) {
        if ( v.correct() )
            continue;
        ++result.counterexamples;
        const bool transfers = std::any_of( strict_clauses.begin(), strict_clauses.end(), [&]( const NegClause& k ) {
            return !verify_counterexample( composite, k, strict.output, spec.bounds, *v.counterexample );
        } );
        if ( transfers )
            ++result.transferred;
    }
    return result;
}

inline TransferResult transfer_counterexamples( const SystemSpec& spec )
{
    const auto composite = composite_of( spec );
    return transfer_counterexamples( spec, check_cft( composite, composed_cft( spec, false ), spec.bounds,
                                                      Precondition::any ) );
}

inline bool transfer_property( const SystemSpec& spec )
{
    return transfer_counterexamples( spec ).holds();
}

// ---------------------------------------------------------------------------
// Generators

struct GenParams
{
    std::size_t max_states = 4;
    std::vector<std::string> inputs{ "a" };
    std::vector<std::string> outputs{ "o" };
    std::size_t domain_size = 2;
    std::string name = "g";
};

namespace detail {

inline std::size_t pick( std::mt19937_64& rng, std::size_t n )
{
    return static_cast<std::size_t>( rng() % n );
}

inline std::vector<std::string> domain_of( std::size_t size )
{
    std::vector<std::string> out;
    for ( std::size_t v = 0; v < size; ++v )
        out.push_back( std::to_string( v ) );
    return out;
}

} // namespace detail

/// Random deterministic component. Each state either accepts a non-empty
/// set of input ports, every value of each, or emits exactly one output.
inline Component gen_component( std::uint64_t seed, const GenParams& params )
{
    if ( params.max_states == 0 || params.domain_size == 0 )
        throw Error( "generator parameters must be positive" );
    std::mt19937_64 rng( seed );
    const auto domain = detail::domain_of( params.domain_size );
    std::vector<PortDecl> ports;
    for ( const auto& p : params.inputs )
        ports.push_back( { p, Direction::in, domain } );
    for ( const auto& p : params.outputs )
        ports.push_back( { p, Direction::out, domain } );

    const std::size_t n = 1 + detail::pick( rng, params.max_states );
    std::vector<std::string> states;
    for ( std::size_t i = 0; i < n; ++i )
        states.push_back( "s" + std::to_string( i ) );

    std::vector<Transition> transitions;
    for ( std::size_t s = 0; s < n; ++s ) {
        const bool can_in = !params.inputs.empty();
        const bool can_out = !params.outputs.empty();
        if ( !can_in && !can_out )
            break;
        const bool output_state = can_out && ( !can_in || detail::pick( rng, 2 ) == 0 );
        if ( output_state ) {
            const auto& port = params.outputs[detail::pick( rng, params.outputs.size() )];
            const auto& value = domain[detail::pick( rng, domain.size() )];
            transitions.push_back( { states[s], out_msg( port, value ), states[detail::pick( rng, n )] } );
            continue;
        }
        std::vector<std::string> chosen;
        for ( const auto& p : params.inputs )
            if ( detail::pick( rng, 2 ) == 0 )
                chosen.push_back( p );
        if ( chosen.empty() )
            chosen.push_back( params.inputs[detail::pick( rng, params.inputs.size() )] );
        for ( const auto& p : chosen )
            for ( const auto& v : domain )
                transitions.push_back( { states[s], in_msg( p, v ), states[detail::pick( rng, n )] } );
    }
    return Component( params.name, std::move( ports ), std::move( states ), "s0", std::move( transitions ) );
}

namespace detail {

inline Formula random_formula( std::mt19937_64& rng, const std::vector<EventRef>& events, std::size_t literals )
{
    if ( literals <= 1 )
        return Formula::literal( events[pick( rng, events.size() )] );
    const std::size_t left = 1 + pick( rng, literals - 1 );
    std::vector<Formula> parts{ random_formula( rng, events, left ), random_formula( rng, events, literals - left ) };
    return pick( rng, 2 ) == 0 ? Formula::conj( std::move( parts ) ) : Formula::disj( std::move( parts ) );
}

inline std::vector<EventRef> input_events( const Component& comp )
{
    std::vector<EventRef> out;
    for ( const auto& p : comp.ports() )
        if ( p.direction == Direction::in ) {
            out.push_back( { p.name, EventKind::exists } );
            out.push_back( { p.name, EventKind::value } );
        }
    return out;
}

} // namespace detail

/// Random CFT over the input events of `comp`, at most four literals.
inline CFT gen_cft( std::uint64_t seed, const Component& comp, const std::string& name = "f" )
{
    const auto events = detail::input_events( comp );
    std::vector<std::string> outputs;
    for ( const auto& p : comp.ports() )
        if ( p.direction == Direction::out )
            outputs.push_back( p.name );
    if ( events.empty() || outputs.empty() )
        throw Error( "ungeneratable: component '" + comp.name() + "' needs an input and an output port" );
    std::mt19937_64 rng( seed );
    const EventRef output{ outputs[detail::pick( rng, outputs.size() )],
                           detail::pick( rng, 2 ) == 0 ? EventKind::exists : EventKind::value };
    const std::size_t literals = 1 + detail::pick( rng, 4 );
    return { name, detail::random_formula( rng, events, literals ), output, comp.name() };
}

/// Disjunction of the VALUE events of every input port. Its negation is a
/// single clause that makes every input relevant.
inline Formula all_inputs_formula( const Component& comp )
{
    std::vector<Formula> parts;
    for ( const auto& p : comp.ports() )
        if ( p.direction == Direction::in )
            parts.push_back( Formula::literal( { p.name, EventKind::value } ) );
    return Formula::disj( std::move( parts ) );
}

struct SystemParams
{
    std::size_t max_states = 4;
    std::size_t domain_size = 2;
    Bounds bounds{};
};

/// Random two-component system connected on port `p`. Component `c` has
/// inputs `p` and possibly `a`, outputs `q` and possibly `r`; `d` has
/// inputs `b` and possibly `e`, outputs `p` and possibly `s`. Each
/// component has at most three ports. Half of the CFTs are the
/// all-inputs disjunction so that a fair share of premises hold.
inline SystemSpec gen_system( std::uint64_t seed, const SystemParams& params = {} )
{
    std::mt19937_64 rng( seed );
    const bool c_extra_in = detail::pick( rng, 2 ) == 0;
    const bool c_extra_out = !c_extra_in && detail::pick( rng, 2 ) == 0;
    const bool d_extra_in = detail::pick( rng, 2 ) == 0;
    const bool d_extra_out = !d_extra_in && detail::pick( rng, 2 ) == 0;

    GenParams cp{ params.max_states, { "p" }, { "q" }, params.domain_size, "c" };
    if ( c_extra_in )
        cp.inputs.push_back( "a" );
    if ( c_extra_out )
        cp.outputs.push_back( "r" );
    GenParams dp{ params.max_states, { "b" }, { "p" }, params.domain_size, "d" };
    if ( d_extra_in )
        dp.inputs.push_back( "e" );
    if ( d_extra_out )
        dp.outputs.push_back( "s" );

    auto c = gen_component( rng(), cp );
    auto d = gen_component( rng(), dp );

    auto cft_c = gen_cft( rng(), c, "fc" );
    if ( detail::pick( rng, 2 ) == 0 )
        cft_c.formula = all_inputs_formula( c );

    Binding binding;
    for ( const auto& event : cft_c.formula.events() ) {
        if ( event.port != "p" )
            continue;
        auto bound = gen_cft( rng(), d, "fd_" + to_string( event.kind ) );
        bound.output = event;
        if ( detail::pick( rng, 2 ) == 0 )
            bound.formula = all_inputs_formula( d );
        binding.emplace( event, std::move( bound ) );
    }
    SystemSpec spec{ "random_" + std::to_string( seed ), std::move( c ), std::move( d ), { "p" }, std::move( cft_c ),
                     std::move( binding ), params.bounds };
    validate_system( spec );
    return spec;
}

// ---------------------------------------------------------------------------
// Campaigns

struct TrialResult
{
    std::uint64_t seed = 0;
    TheoremReport report;
    /// Counterexample transfer, judged when the premises failed.
    std::optional<TransferResult> transfer;
};

struct CampaignResult
{
    std::vector<TrialResult> trials;

    [[nodiscard]] std::size_t count( TheoremStatus s ) const
    {
        return static_cast<std::size_t>( std::count_if(
            trials.begin(), trials.end(), [&]( const TrialResult& t ) { return t.report.status == s; } ) );
    }

    [[nodiscard]] std::size_t strict_violations() const
    {
        return static_cast<std::size_t>( std::count_if(
            trials.begin(), trials.end(), []( const TrialResult& t ) { return t.report.strict_violation(); } ) );
    }

    [[nodiscard]] bool transfer_holds() const
    {
        return std::all_of( trials.begin(), trials.end(),
                            []( const TrialResult& t ) { return !t.transfer || t.transfer->holds(); } );
    }
};

/// Runs `trials` random systems with seeds `seed, seed + 1, ...` on a worker
/// pool; results come back in seed order.
inline CampaignResult run_campaign( std::uint64_t seed, std::size_t trials, const SystemParams& params = {},
                                    std::size_t jobs = job_count() )
{
    CampaignResult out;
    out.trials = parallel_map(
        trials,
        [&]( std::size_t i ) {
            const std::uint64_t s = seed + i;
            const auto spec = gen_system( s, params );
            TrialResult trial{ s, validate_theorem_instance( spec ), std::nullopt };
            if ( trial.report.status == TheoremStatus::premises_failed )
                trial.transfer = transfer_counterexamples( spec );
            return trial;
        },
        jobs );
    return out;
}

inline std::string format_campaign( const CampaignResult& result )
{
    std::string out;
    std::size_t counterexamples = 0;
    std::size_t transferred = 0;
    for ( const auto& t : result.trials ) {
        out += "TRIAL seed=" + std::to_string( t.seed ) + " status=" + to_string( t.report.status ) + " strict=" +
               ( !t.report.strict_conclusion                ? "unjudged"
                 : all_correct( *t.report.strict_conclusion ) ? "correct"
                                                              : "refuted" );
        if ( t.transfer ) {
            out += " transfer=" + std::to_string( t.transfer->transferred ) + "/" +
                   std::to_string( t.transfer->counterexamples );
            counterexamples += t.transfer->counterexamples;
            transferred += t.transfer->transferred;
        }
        out += "\n";
        if ( t.report.status == TheoremStatus::violation )
            out += format_report( t.report );
    }
    out += "SUMMARY trials=" + std::to_string( result.trials.size() ) +
           " validated=" + std::to_string( result.count( TheoremStatus::validated ) ) +
           " premises_failed=" + std::to_string( result.count( TheoremStatus::premises_failed ) ) +
           " violations=" + std::to_string( result.count( TheoremStatus::violation ) ) +
           " strict_refuted=" + std::to_string( result.strict_violations() ) + " transfer=" +
           std::to_string( transferred ) + "/" + std::to_string( counterexamples ) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Strict composition properties

/// Product structure of the strict composition: every clause is a clause
/// of the consuming CFT joined with one clause of the formula of each bound
/// event it contains. Returns the expected clause list, canonicalized.
inline std::vector<NegClause> product_clauses( const CFT& cft_c, const Binding& binding )
{
    std::vector<NegClause> out;
    for ( const auto& base : clauses( cft_c ) ) {
        std::vector<NegClause> partial{ base };
        for ( const auto& event : base.events() ) {
            auto it = binding.find( event );
            if ( it == binding.end() )
                continue;
            std::vector<NegClause> next;
            for ( const auto& p : partial )
                for ( const auto& q : clauses( it->second ) )
                    next.push_back( p.merged( q ) );
            partial = std::move( next );
        }
        out.insert( out.end(), partial.begin(), partial.end() );
    }
    return canonicalize( std::move( out ) );
}

/// Strict composed CFT has the product clause structure.
inline bool strict_clause_structure_holds( const CFT& cft_c, const Binding& binding )
{
    return clauses( compose_strict( cft_c, binding ) ) == product_clauses( cft_c, binding );
}

/// Correctness of the strict composition judged on `c` alone. Returns
/// nullopt when the premise (cft_c correct on c) does not hold.
inline std::optional<std::vector<Verdict>> strict_correct_on_c( const SystemSpec& spec )
{
    if ( !all_correct( check_cft( spec.c, spec.cft_c, spec.bounds ) ) )
        return std::nullopt;
    return check_cft( spec.c, composed_cft( spec, true ), spec.bounds );
}

/// Correctness of the strict composition judged on `d` alone. Returns
/// nullopt when some bound CFT is not correct on d.
inline std::optional<std::vector<Verdict>> strict_correct_on_d( const SystemSpec& spec )
{
    for ( const auto& [event, cft] : spec.cfts_d )
        if ( !all_correct( check_cft( spec.d, cft, spec.bounds ) ) )
            return std::nullopt;
    return check_cft( spec.d, composed_cft( spec, true ), spec.bounds );
}

} // namespace cftc
