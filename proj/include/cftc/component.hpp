#pragma once

#include "cftc/error.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cftc {

enum class Direction { in, out };

struct PortDecl
{
    std::string name;
    Direction direction = Direction::in;
    std::vector<std::string> domain;

    friend bool operator==( const PortDecl&, const PortDecl& ) = default;
};

/// A directed communication `port?value` (input) or `port!value` (output).
struct Message
{
    std::string port;
    std::string value;
    Direction direction = Direction::in;

    [[nodiscard]] bool is_input() const { return direction == Direction::in; }

    friend auto operator<=>( const Message&, const Message& ) = default;
    friend bool operator==( const Message&, const Message& ) = default;
};

using Trace = std::vector<Message>;

inline Message in_msg( std::string port, std::string value )
{
    return { std::move( port ), std::move( value ), Direction::in };
}

inline Message out_msg( std::string port, std::string value )
{
    return { std::move( port ), std::move( value ), Direction::out };
}

inline std::string to_string( const Message& m )
{
    return m.port + ( m.is_input() ? "?" : "!" ) + m.value;
}

inline std::ostream& operator<<( std::ostream& os, const Message& m )
{
    return os << to_string( m );
}

/// Dotted message list, `eps` for the empty trace.
inline std::string to_string( const Trace& t )
{
    if ( t.empty() )
        return "eps";
    std::string out;
    for ( const auto& m : t ) {
        if ( !out.empty() )
            out += ".";
        out += to_string( m );
    }
    return out;
}

inline Message parse_message( std::string_view text )
{
    const auto mark = text.find_first_of( "?!" );
    if ( mark == std::string_view::npos || mark == 0 || mark + 1 == text.size() )
        throw Error( "malformed message '" + std::string( text ) + "'" );
    return { std::string( text.substr( 0, mark ) ), std::string( text.substr( mark + 1 ) ),
             text[mark] == '?' ? Direction::in : Direction::out };
}

inline Trace parse_trace( std::string_view text )
{
    Trace out;
    if ( text == "eps" || text.empty() )
        return out;
    std::size_t start = 0;
    while ( start <= text.size() ) {
        auto dot = text.find( '.', start );
        if ( dot == std::string_view::npos )
            dot = text.size();
        out.push_back( parse_message( text.substr( start, dot - start ) ) );
        start = dot + 1;
    }
    return out;
}

using StateId = std::size_t;

struct Transition
{
    std::string from;
    Message message;
    std::string to;

    friend bool operator==( const Transition&, const Transition& ) = default;
};

/// Finite input/output labelled transition system. Immutable after
/// construction; the constructor checks every structural invariant.
class Component
{
public:
    Component( std::string name, std::vector<PortDecl> ports, std::vector<std::string> states, std::string initial,
               std::vector<Transition> transitions )
        : name_{ std::move( name ) }, ports_{ std::move( ports ) }, states_{ std::move( states ) },
          transitions_{ std::move( transitions ) }
    {
        for ( std::size_t i = 0; i < ports_.size(); ++i ) {
            if ( ports_[i].domain.empty() )
                throw Error( "port '" + ports_[i].name + "' has an empty domain" );
            if ( !port_index_.emplace( ports_[i].name, i ).second )
                throw Error( "duplicate port '" + ports_[i].name + "'" );
        }
        for ( std::size_t i = 0; i < states_.size(); ++i )
            if ( !state_index_.emplace( states_[i], i ).second )
                throw Error( "duplicate state '" + states_[i] + "'" );
        auto init = state_index_.find( initial );
        if ( init == state_index_.end() )
            throw Error( "initial state '" + initial + "' is not a state of '" + name_ + "'" );
        initial_ = init->second;

        out_.resize( states_.size() );
        for ( const auto& tr : transitions_ ) {
            check_message( tr.message );
            auto from = state_index_.find( tr.from );
            auto to = state_index_.find( tr.to );
            if ( from == state_index_.end() )
                throw Error( "unknown state '" + tr.from + "'" );
            if ( to == state_index_.end() )
                throw Error( "unknown state '" + tr.to + "'" );
            auto& edges = out_[from->second];
            const std::pair<Message, StateId> edge{ tr.message, to->second };
            if ( std::find( edges.begin(), edges.end(), edge ) == edges.end() )
                edges.push_back( edge );
        }
        for ( auto& edges : out_ )
            std::sort( edges.begin(), edges.end() );
    }

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::vector<PortDecl>& ports() const { return ports_; }
    [[nodiscard]] const std::vector<std::string>& states() const { return states_; }
    [[nodiscard]] const std::vector<Transition>& transitions() const { return transitions_; }
    [[nodiscard]] StateId initial() const { return initial_; }
    [[nodiscard]] std::size_t state_count() const { return states_.size(); }
    [[nodiscard]] const std::string& state_name( StateId s ) const { return states_.at( s ); }

    [[nodiscard]] StateId state_id( const std::string& name ) const
    {
        auto it = state_index_.find( name );
        if ( it == state_index_.end() )
            throw Error( "unknown state '" + name + "'" );
        return it->second;
    }

    [[nodiscard]] const PortDecl* find_port( const std::string& name ) const
    {
        auto it = port_index_.find( name );
        return it == port_index_.end() ? nullptr : &ports_[it->second];
    }

    /// Outgoing edges of `s`, sorted by (message, target).
    [[nodiscard]] const std::vector<std::pair<Message, StateId>>& edges( StateId s ) const { return out_.at( s ); }

    /// Every message the component can communicate according to its ports.
    [[nodiscard]] std::vector<Message> alphabet() const
    {
        std::vector<Message> out;
        for ( const auto& p : ports_ )
            for ( const auto& v : p.domain )
                out.push_back( { p.name, v, p.direction } );
        std::sort( out.begin(), out.end() );
        return out;
    }

    [[nodiscard]] std::vector<Message> input_alphabet() const
    {
        auto all = alphabet();
        std::erase_if( all, []( const Message& m ) { return !m.is_input(); } );
        return all;
    }

    friend bool operator==( const Component& a, const Component& b )
    {
        return a.name_ == b.name_ && a.ports_ == b.ports_ && a.states_ == b.states_ && a.initial_ == b.initial_ &&
               a.transitions_ == b.transitions_;
    }

    void check_message( const Message& m ) const
    {
        const auto* port = find_port( m.port );
        if ( port == nullptr )
            throw Error( "unknown port '" + m.port + "' in component '" + name_ + "'" );
        if ( port->direction != m.direction )
            throw Error( "direction mismatch for message '" + to_string( m ) + "'" );
        if ( std::find( port->domain.begin(), port->domain.end(), m.value ) == port->domain.end() )
            throw Error( "value '" + m.value + "' not in domain of port '" + m.port + "'" );
    }

private:
    std::string name_;
    std::vector<PortDecl> ports_;
    std::vector<std::string> states_;
    std::vector<Transition> transitions_;
    StateId initial_ = 0;
    std::map<std::string, std::size_t> port_index_;
    std::map<std::string, StateId> state_index_;
    std::vector<std::vector<std::pair<Message, StateId>>> out_;
};

inline std::vector<StateId> successors( const Component& comp, StateId state, const Message& m )
{
    std::vector<StateId> out;
    for ( const auto& [msg, to] : comp.edges( state ) )
        if ( msg == m )
            out.push_back( to );
    return out;
}

/// Unique successor of `state` under `m`, if any.
inline std::optional<StateId> step( const Component& comp, StateId state, const Message& m )
{
    auto next = successors( comp, state, m );
    if ( next.empty() )
        return std::nullopt;
    if ( next.size() > 1 )
        throw Error( "internal error: non-deterministic successor for '" + to_string( m ) + "' at state '" +
                     comp.state_name( state ) + "'" );
    return next.front();
}

using StateSet = std::vector<StateId>; // sorted, unique

/// Image of a state set under one message.
inline StateSet post( const Component& comp, const StateSet& from, const Message& m )
{
    StateSet out;
    for ( auto s : from )
        for ( const auto& [msg, to] : comp.edges( s ) )
            if ( msg == m )
                out.push_back( to );
    std::sort( out.begin(), out.end() );
    out.erase( std::unique( out.begin(), out.end() ), out.end() );
    return out;
}

/// States reachable by communicating `t` from the initial state.
inline StateSet states_after( const Component& comp, const Trace& t )
{
    StateSet current{ comp.initial() };
    for ( const auto& m : t ) {
        current = post( comp, current, m );
        if ( current.empty() )
            break;
    }
    return current;
}

inline bool accepts_trace( const Component& comp, const Trace& t )
{
    return !states_after( comp, t ).empty();
}

/// Messages enabled in at least one state of `states`, sorted.
inline std::vector<Message> enabled( const Component& comp, const StateSet& states )
{
    std::vector<Message> out;
    for ( auto s : states )
        for ( const auto& edge : comp.edges( s ) )
            out.push_back( edge.first );
    std::sort( out.begin(), out.end() );
    out.erase( std::unique( out.begin(), out.end() ), out.end() );
    return out;
}

/// All accepted traces of length at most `depth`, in lexicographic order.
inline std::set<Trace> traces_up_to( const Component& comp, std::size_t depth )
{
    std::set<Trace> out;
    std::vector<std::pair<Trace, StateSet>> frontier{ { Trace{}, StateSet{ comp.initial() } } };
    out.insert( Trace{} );
    for ( std::size_t len = 0; len < depth && !frontier.empty(); ++len ) {
        std::vector<std::pair<Trace, StateSet>> next;
        for ( const auto& [trace, states] : frontier ) {
            for ( const auto& m : enabled( comp, states ) ) {
                Trace extended = trace;
                extended.push_back( m );
                out.insert( extended );
                next.emplace_back( std::move( extended ), post( comp, states, m ) );
            }
        }
        frontier = std::move( next );
    }
    return out;
}

inline std::vector<StateId> reachable_states( const Component& comp )
{
    std::vector<bool> seen( comp.state_count(), false );
    std::vector<StateId> stack{ comp.initial() };
    seen[comp.initial()] = true;
    std::vector<StateId> out;
    while ( !stack.empty() ) {
        auto s = stack.back();
        stack.pop_back();
        out.push_back( s );
        for ( const auto& edge : comp.edges( s ) )
            if ( !seen[edge.second] ) {
                seen[edge.second] = true;
                stack.push_back( edge.second );
            }
    }
    std::sort( out.begin(), out.end() );
    return out;
}

struct Violation
{
    std::string state;
    int condition = 0; // 1: input-enabledness, 2: single non-input, 3: unique successor
    std::string detail;

    friend bool operator==( const Violation&, const Violation& ) = default;
};

/// Checks the three determinism conditions at every reachable state.
inline std::vector<Violation> validate_deterministic( const Component& comp )
{
    std::vector<Violation> out;
    for ( auto s : reachable_states( comp ) ) {
        const auto& edges = comp.edges( s );
        std::vector<Message> msgs;
        for ( const auto& edge : edges )
            msgs.push_back( edge.first );
        msgs.erase( std::unique( msgs.begin(), msgs.end() ), msgs.end() );

        std::set<std::string> input_ports;
        for ( const auto& m : msgs )
            if ( m.is_input() )
                input_ports.insert( m.port );
        for ( const auto& port : input_ports ) {
            for ( const auto& v : comp.find_port( port )->domain ) {
                if ( std::find( msgs.begin(), msgs.end(), in_msg( port, v ) ) == msgs.end() ) {
                    out.push_back( { comp.state_name( s ), 1, "input " + port + "?" + v + " not enabled" } );
                    break;
                }
            }
        }

        const bool has_output = std::any_of( msgs.begin(), msgs.end(), []( const Message& m ) { return !m.is_input(); } );
        if ( has_output && msgs.size() > 1 )
            out.push_back( { comp.state_name( s ), 2, "output enabled together with another message" } );

        for ( std::size_t i = 1; i < edges.size(); ++i )
            if ( edges[i].first == edges[i - 1].first ) {
                out.push_back( { comp.state_name( s ), 3, "several successors for " + to_string( edges[i].first ) } );
                break;
            }
    }
    return out;
}

inline bool is_deterministic( const Component& comp )
{
    return validate_deterministic( comp ).empty();
}

/// Synchronous product of `c` (consumer) and `d` (producer). On every
/// connected port, `d`'s output and `c`'s input fire together and show up as
/// one output message of the composite; all other messages interleave.
/// Only reachable product states are materialised.
inline Component compose_components( const Component& c, const Component& d, const std::vector<std::string>& connections )
{
    std::set<std::string> connected( connections.begin(), connections.end() );
    for ( const auto& port : connected ) {
        const auto* in = c.find_port( port );
        const auto* out = d.find_port( port );
        if ( in == nullptr || out == nullptr || in->direction != Direction::in || out->direction != Direction::out ||
             in->domain != out->domain )
            throw Error( "connection mismatch on port '" + port + "'" );
    }

    std::vector<PortDecl> ports;
    std::set<std::string> names;
    auto add_port = [&]( PortDecl p ) {
        if ( !names.insert( p.name ).second )
            throw Error( "port name clash on '" + p.name + "' when composing '" + c.name() + "' and '" + d.name() + "'" );
        ports.push_back( std::move( p ) );
    };
    for ( const auto& p : c.ports() )
        if ( !connected.count( p.name ) )
            add_port( p );
    for ( const auto& p : d.ports() ) {
        if ( connected.count( p.name ) )
            add_port( { p.name, Direction::out, p.domain } );
        else
            add_port( p );
    }

    auto pair_name = [&]( StateId x, StateId y ) { return c.state_name( x ) + "__" + d.state_name( y ); };

    std::map<std::pair<StateId, StateId>, std::string> seen;
    std::vector<std::string> states;
    std::vector<Transition> transitions;
    std::vector<std::pair<StateId, StateId>> queue{ { c.initial(), d.initial() } };
    seen.emplace( queue.front(), pair_name( c.initial(), d.initial() ) );
    states.push_back( seen.begin()->second );

    auto visit = [&]( std::pair<StateId, StateId> target ) -> const std::string& {
        auto [it, fresh] = seen.emplace( target, pair_name( target.first, target.second ) );
        if ( fresh ) {
            states.push_back( it->second );
            queue.push_back( target );
        }
        return it->second;
    };

    for ( std::size_t head = 0; head < queue.size(); ++head ) {
        const auto [x, y] = queue[head];
        const std::string from = seen.at( { x, y } );
        for ( const auto& [m, x2] : c.edges( x ) )
            if ( !connected.count( m.port ) )
                transitions.push_back( { from, m, visit( { x2, y } ) } );
        for ( const auto& [m, y2] : d.edges( y ) ) {
            if ( !connected.count( m.port ) ) {
                transitions.push_back( { from, m, visit( { x, y2 } ) } );
                continue;
            }
            for ( auto x2 : successors( c, x, in_msg( m.port, m.value ) ) )
                transitions.push_back( { from, m, visit( { x2, y2 } ) } );
        }
    }

    return Component( c.name() + "_" + d.name(), std::move( ports ), std::move( states ),
                      pair_name( c.initial(), d.initial() ), std::move( transitions ) );
}

/// Reachable product states at which `d` can emit on a connected port but
/// `c` cannot receive that message, so the handshake blocks.
inline std::size_t count_blocked_handshakes( const Component& c, const Component& d,
                                             const std::vector<std::string>& connections )
{
    std::set<std::string> connected( connections.begin(), connections.end() );
    std::set<std::pair<StateId, StateId>> seen{ { c.initial(), d.initial() } };
    std::vector<std::pair<StateId, StateId>> queue{ { c.initial(), d.initial() } };
    std::size_t blocked = 0;
    for ( std::size_t head = 0; head < queue.size(); ++head ) {
        const auto [x, y] = queue[head];
        auto visit = [&]( StateId a, StateId b ) {
            if ( seen.insert( { a, b } ).second )
                queue.emplace_back( a, b );
        };
        bool blocks = false;
        for ( const auto& [m, x2] : c.edges( x ) )
            if ( !connected.count( m.port ) )
                visit( x2, y );
        for ( const auto& [m, y2] : d.edges( y ) ) {
            if ( !connected.count( m.port ) ) {
                visit( x, y2 );
                continue;
            }
            const auto next = successors( c, x, in_msg( m.port, m.value ) );
            if ( next.empty() )
                blocks = true;
            for ( auto x2 : next )
                visit( x2, y2 );
        }
        if ( blocks )
            ++blocked;
    }
    return blocked;
}

} // namespace cftc
