#pragma once

#include "cftc/component.hpp"
#include "cftc/error.hpp"
#include "cftc/formula.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace cftc {

/// Component fault tree: `formula` over input events of `owner` describes
/// which input failures can cause the failure `output`.
struct CFT
{
    std::string name;
    Formula formula;
    EventRef output;
    std::string owner;

    friend bool operator==( const CFT&, const CFT& ) = default;
};

/// Input event of the consuming component -> CFT of the producing component
/// whose output event is that same event.
using Binding = std::map<EventRef, CFT>;

/// Checks the CFT against the ports of its owner.
inline void validate_cft( const CFT& cft, const Component& owner )
{
    const auto* out = owner.find_port( cft.output.port );
    if ( out == nullptr )
        throw Error( "unknown port '" + cft.output.port + "' in CFT '" + cft.name + "'" );
    if ( out->direction != Direction::out )
        throw Error( "output event '" + to_string( cft.output ) + "' of CFT '" + cft.name + "' is not on an output port" );
    for ( const auto& event : cft.formula.events() ) {
        const auto* port = owner.find_port( event.port );
        if ( port == nullptr )
            throw Error( "unknown port '" + event.port + "' in CFT '" + cft.name + "'" );
        if ( port->direction != Direction::in )
            throw Error( "event '" + to_string( event ) + "' of CFT '" + cft.name + "' is not an input event" );
    }
}

namespace detail {

template <typename Substitute>
CFT compose_with( const CFT& cft, const Binding& binding, const std::vector<std::string>& connections,
                  std::string owner, Substitute&& substitute_fn )
{
    std::set<std::string> connected( connections.begin(), connections.end() );
    for ( const auto& [event, bound] : binding ) {
        if ( bound.output != event )
            throw Error( "binding mismatch: event '" + to_string( event ) + "' bound to CFT '" + bound.name +
                         "' with output '" + to_string( bound.output ) + "'" );
        connected.insert( event.port );
    }
    for ( const auto& event : cft.formula.events() )
        if ( connected.count( event.port ) && !binding.count( event ) )
            throw Error( "unbound connected event '" + to_string( event ) + "'" );

    Formula formula = cft.formula;
    for ( const auto& [event, bound] : binding )
        formula = substitute_fn( formula, event, bound.formula );
    if ( owner.empty() ) {
        owner = cft.owner;
        if ( !binding.empty() )
            owner += "_" + binding.begin()->second.owner;
    }
    return { cft.name, std::move( formula ), cft.output, std::move( owner ) };
}

} // namespace detail

/// Replaces every bound event by the formula of its CFT.
inline CFT compose( const CFT& cft, const Binding& binding, const std::vector<std::string>& connections = {},
                    std::string owner = {} )
{
    return detail::compose_with( cft, binding, connections, std::move( owner ),
                                 []( const Formula& f, const EventRef& e, const Formula& q ) { return substitute( f, e, q ); } );
}

/// Replaces every bound event `A` by `A & P`, with `P` the formula of its CFT.
inline CFT compose_strict( const CFT& cft, const Binding& binding, const std::vector<std::string>& connections = {},
                           std::string owner = {} )
{
    return detail::compose_with( cft, binding, connections, std::move( owner ),
                                 []( const Formula& f, const EventRef& e, const Formula& q ) {
                                     return substitute_strict( f, e, q );
                                 } );
}

inline std::vector<NegClause> clauses( const CFT& cft )
{
    return neg_dnf( cft.formula );
}

} // namespace cftc
