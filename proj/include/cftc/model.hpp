#pragma once

#include "cftc/cft.hpp"
#include "cftc/component.hpp"
#include "cftc/error.hpp"
#include "cftc/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cftc {

/// A `system` block: component `c` consumes from component `d` over the
/// connected ports, `bindings` maps events of `c` to CFT names of `d`.
struct SystemDecl
{
    std::string name;
    std::string c;
    std::string d;
    std::vector<std::string> connections;
    std::map<EventRef, std::string> bindings;
    std::string check;

    friend bool operator==( const SystemDecl&, const SystemDecl& ) = default;
};

struct Model
{
    std::vector<Component> components;
    std::vector<CFT> cfts;
    std::vector<SystemDecl> systems;

    [[nodiscard]] const Component& component( const std::string& name ) const
    {
        for ( const auto& c : components )
            if ( c.name() == name )
                return c;
        throw Error( "unknown component '" + name + "'" );
    }

    [[nodiscard]] const CFT& cft( const std::string& name ) const
    {
        for ( const auto& c : cfts )
            if ( c.name == name )
                return c;
        throw Error( "unknown CFT '" + name + "'" );
    }

    [[nodiscard]] const SystemDecl& system( const std::string& name ) const
    {
        for ( const auto& s : systems )
            if ( s.name == name )
                return s;
        throw Error( "unknown system '" + name + "'" );
    }

    friend bool operator==( const Model&, const Model& ) = default;
};

namespace detail {

struct Located
{
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

struct Token
{
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

inline bool is_word_char( char c )
{
    return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_';
}

class ModelScanner
{
public:
    explicit ModelScanner( std::string_view text ) : text_{ text } {}

    [[nodiscard]] bool at_end()
    {
        skip_space();
        return pos_ >= text_.size();
    }

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

    [[noreturn]] void fail( const std::string& what ) const { throw ParseError( what, line_, column_ ); }

    Token word()
    {
        skip_space();
        Token tok{ {}, line_, column_ };
        while ( pos_ < text_.size() && is_word_char( text_[pos_] ) )
            tok.text += advance();
        if ( tok.text.empty() )
            fail( pos_ < text_.size() ? "expected a name, found '" + std::string( 1, text_[pos_] ) + "'"
                                      : "expected a name, found end of input" );
        return tok;
    }

    void expect( char c )
    {
        skip_space();
        if ( pos_ >= text_.size() || text_[pos_] != c )
            fail( std::string( "expected '" ) + c + "'" );
        advance();
    }

    [[nodiscard]] bool peek( char c )
    {
        skip_space();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    /// Raw statement text up to the next `;` or `}` at brace depth zero.
    Located statement()
    {
        skip_space();
        Located out{ {}, line_, column_ };
        int depth = 0;
        while ( pos_ < text_.size() ) {
            const char c = text_[pos_];
            if ( c == '#' ) {
                skip_comment();
                out.text += ' ';
                continue;
            }
            if ( depth == 0 && ( c == ';' || c == '}' ) )
                break;
            if ( c == '{' )
                ++depth;
            if ( c == '}' )
                --depth;
            out.text += advance();
        }
        if ( pos_ >= text_.size() )
            fail( "unterminated block" );
        while ( !out.text.empty() && std::isspace( static_cast<unsigned char>( out.text.back() ) ) )
            out.text.pop_back();
        return out;
    }

private:
    char advance()
    {
        const char c = text_[pos_++];
        if ( c == '\n' ) {
            ++line_;
            column_ = 1;
        }
        else {
            ++column_;
        }
        return c;
    }

    void skip_comment()
    {
        while ( pos_ < text_.size() && text_[pos_] != '\n' )
            advance();
    }

    void skip_space()
    {
        while ( pos_ < text_.size() ) {
            if ( text_[pos_] == '#' )
                skip_comment();
            else if ( std::isspace( static_cast<unsigned char>( text_[pos_] ) ) )
                advance();
            else
                break;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

/// Splits a statement into words and punctuation. `--`, `-->`, `->` and `:=`
/// are single tokens.
inline std::vector<Token> tokenize( const Located& stmt )
{
    std::vector<Token> out;
    std::size_t line = stmt.line;
    std::size_t column = stmt.column;
    const auto& s = stmt.text;
    std::size_t i = 0;
    auto step = [&]( std::size_t n ) {
        for ( std::size_t k = 0; k < n; ++k, ++i ) {
            if ( s[i] == '\n' ) {
                ++line;
                column = 1;
            }
            else {
                ++column;
            }
        }
    };
    while ( i < s.size() ) {
        if ( std::isspace( static_cast<unsigned char>( s[i] ) ) ) {
            step( 1 );
            continue;
        }
        Token tok{ {}, line, column };
        if ( is_word_char( s[i] ) ) {
            std::size_t j = i;
            while ( j < s.size() && is_word_char( s[j] ) )
                ++j;
            tok.text = s.substr( i, j - i );
        }
        else {
            for ( std::string_view op : { "-->", "--", "->", ":=" } )
                if ( s.compare( i, op.size(), op ) == 0 ) {
                    tok.text = op;
                    break;
                }
            if ( tok.text.empty() )
                tok.text = std::string( 1, s[i] );
        }
        step( tok.text.size() );
        out.push_back( std::move( tok ) );
    }
    return out;
}

class TokenCursor
{
public:
    TokenCursor( std::vector<Token> tokens, const Located& stmt ) : tokens_{ std::move( tokens ) }, stmt_{ stmt } {}

    [[nodiscard]] bool done() const { return pos_ >= tokens_.size(); }

    const Token& next( const char* what )
    {
        if ( done() )
            throw ParseError( std::string( "expected " ) + what + " at end of statement", end_line(), end_column() );
        return tokens_[pos_++];
    }

    const Token& word( const char* what )
    {
        const auto& tok = next( what );
        if ( !is_word_char( tok.text.front() ) )
            throw ParseError( std::string( "expected " ) + what + ", found '" + tok.text + "'", tok.line, tok.column );
        return tok;
    }

    void expect( std::string_view text )
    {
        const auto& tok = next( std::string( "'" + std::string( text ) + "'" ).c_str() );
        if ( tok.text != text )
            throw ParseError( "expected '" + std::string( text ) + "', found '" + tok.text + "'", tok.line,
                              tok.column );
    }

    void finish()
    {
        if ( !done() )
            throw ParseError( "unexpected '" + tokens_[pos_].text + "'", tokens_[pos_].line, tokens_[pos_].column );
    }

private:
    [[nodiscard]] std::size_t end_line() const { return tokens_.empty() ? stmt_.line : tokens_.back().line; }
    [[nodiscard]] std::size_t end_column() const
    {
        return tokens_.empty() ? stmt_.column : tokens_.back().column + tokens_.back().text.size();
    }

    std::vector<Token> tokens_;
    Located stmt_;
    std::size_t pos_ = 0;
};

inline EventKind parse_kind( const Token& tok )
{
    if ( tok.text == "exists" )
        return EventKind::exists;
    if ( tok.text == "value" )
        return EventKind::value;
    throw ParseError( "expected 'exists' or 'value', found '" + tok.text + "'", tok.line, tok.column );
}

struct PendingTransition
{
    Transition transition;
    Token at;
};

inline Component parse_component_block( ModelScanner& in, const Token& name )
{
    in.expect( '{' );
    std::vector<PortDecl> ports;
    std::map<std::string, Token> port_at;
    std::optional<Token> initial;
    std::vector<PendingTransition> pending;
    std::vector<std::string> states;
    auto add_state = [&]( const std::string& s ) {
        if ( std::find( states.begin(), states.end(), s ) == states.end() )
            states.push_back( s );
    };

    while ( !in.peek( '}' ) ) {
        const auto stmt = in.statement();
        TokenCursor cur( tokenize( stmt ), stmt );
        if ( !cur.done() ) {
            const auto head = cur.word( "a declaration" );
            if ( head.text == "in" || head.text == "out" ) {
                const auto port = cur.word( "a port name" );
                cur.expect( ":" );
                cur.expect( "{" );
                PortDecl decl{ port.text, head.text == "in" ? Direction::in : Direction::out, {} };
                while ( true ) {
                    const auto value = cur.word( "a value" );
                    if ( std::find( decl.domain.begin(), decl.domain.end(), value.text ) != decl.domain.end() )
                        throw ParseError( "duplicate value '" + value.text + "' in domain of port '" + port.text + "'",
                                          value.line, value.column );
                    decl.domain.push_back( value.text );
                    const auto sep = cur.next( "',' or '}'" );
                    if ( sep.text == "}" )
                        break;
                    if ( sep.text != "," )
                        throw ParseError( "expected ',' or '}', found '" + sep.text + "'", sep.line, sep.column );
                }
                cur.finish();
                if ( port_at.count( port.text ) )
                    throw ParseError( "duplicate port '" + port.text + "'", port.line, port.column );
                port_at.emplace( port.text, port );
                ports.push_back( std::move( decl ) );
            }
            else if ( head.text == "init" ) {
                const auto state = cur.word( "a state name" );
                cur.finish();
                if ( initial )
                    throw ParseError( "duplicate init declaration", head.line, head.column );
                initial = state;
            }
            else {
                cur.expect( "--" );
                const auto port = cur.word( "a port name" );
                const auto mark = cur.next( "'?' or '!'" );
                if ( mark.text != "?" && mark.text != "!" )
                    throw ParseError( "expected '?' or '!', found '" + mark.text + "'", mark.line, mark.column );
                const auto value = cur.word( "a value" );
                cur.expect( "-->" );
                const auto to = cur.word( "a state name" );
                cur.finish();
                pending.push_back(
                    { { head.text, { port.text, value.text, mark.text == "?" ? Direction::in : Direction::out }, to.text },
                      port } );
            }
        }
        if ( in.peek( ';' ) )
            in.expect( ';' );
    }
    in.expect( '}' );

    if ( !initial )
        throw ParseError( "component '" + name.text + "' has no init declaration", name.line, name.column );
    add_state( initial->text );
    for ( const auto& p : pending ) {
        const auto& m = p.transition.message;
        auto it = std::find_if( ports.begin(), ports.end(), [&]( const PortDecl& d ) { return d.name == m.port; } );
        if ( it == ports.end() )
            throw ParseError( "unknown port '" + m.port + "' in component '" + name.text + "'", p.at.line,
                              p.at.column );
        if ( it->direction != m.direction )
            throw ParseError( "direction mismatch for message '" + to_string( m ) + "'", p.at.line, p.at.column );
        if ( std::find( it->domain.begin(), it->domain.end(), m.value ) == it->domain.end() )
            throw ParseError( "value '" + m.value + "' not in domain of port '" + m.port + "'", p.at.line,
                              p.at.column );
        add_state( p.transition.from );
        add_state( p.transition.to );
    }
    std::vector<Transition> transitions;
    for ( auto& p : pending )
        transitions.push_back( std::move( p.transition ) );
    try {
        return Component( name.text, std::move( ports ), std::move( states ), initial->text, std::move( transitions ) );
    }
    catch ( const ParseError& ) {
        throw;
    }
    catch ( const Error& e ) {
        throw ParseError( e.what(), name.line, name.column );
    }
}

inline CFT parse_cft_block( ModelScanner& in, const Token& name, const Token& owner, const Component& comp )
{
    in.expect( '{' );
    std::optional<EventRef> output;
    std::optional<Formula> formula;
    Token output_at = name;
    while ( !in.peek( '}' ) ) {
        const auto stmt = in.statement();
        auto tokens = tokenize( stmt );
        if ( !tokens.empty() ) {
            const auto& head = tokens.front();
            if ( head.text == "output" ) {
                TokenCursor cur( tokens, stmt );
                cur.next( "'output'" );
                const auto port = cur.word( "a port name" );
                cur.expect( "." );
                const auto kind = parse_kind( cur.word( "an event kind" ) );
                cur.finish();
                if ( output )
                    throw ParseError( "duplicate output declaration", head.line, head.column );
                output = EventRef{ port.text, kind };
                output_at = port;
            }
            else if ( head.text == "formula" ) {
                if ( formula )
                    throw ParseError( "duplicate formula declaration", head.line, head.column );
                // Column of the first character after the keyword.
                std::size_t offset = 0;
                while ( offset < stmt.text.size() && std::isspace( static_cast<unsigned char>( stmt.text[offset] ) ) )
                    ++offset;
                offset += std::string_view( "formula" ).size();
                std::size_t line = head.line;
                std::size_t column = head.column + std::string_view( "formula" ).size();
                formula = parse_formula( std::string_view( stmt.text ).substr( offset ), line, column );
            }
            else {
                throw ParseError( "unexpected '" + head.text + "' in CFT block", head.line, head.column );
            }
        }
        if ( in.peek( ';' ) )
            in.expect( ';' );
    }
    in.expect( '}' );
    if ( !output )
        throw ParseError( "CFT '" + name.text + "' has no output declaration", name.line, name.column );
    if ( !formula )
        throw ParseError( "CFT '" + name.text + "' has no formula", name.line, name.column );
    CFT cft{ name.text, *formula, *output, owner.text };
    try {
        validate_cft( cft, comp );
    }
    catch ( const Error& e ) {
        throw ParseError( e.what(), output_at.line, output_at.column );
    }
    return cft;
}

inline SystemDecl parse_system_block( ModelScanner& in, const Token& name, const Model& model )
{
    in.expect( '{' );
    SystemDecl sys{ name.text, {}, {}, {}, {}, {} };
    struct BindAt
    {
        EventRef event;
        Token cft;
    };
    std::vector<BindAt> binds;
    std::optional<Token> check;
    std::vector<std::pair<Token, Token>> connects;
    bool used = false;

    while ( !in.peek( '}' ) ) {
        const auto stmt = in.statement();
        TokenCursor cur( tokenize( stmt ), stmt );
        if ( !cur.done() ) {
            const auto head = cur.word( "a declaration" );
            if ( head.text == "use" ) {
                const auto c = cur.word( "a component name" );
                const auto d = cur.word( "a component name" );
                cur.finish();
                if ( used )
                    throw ParseError( "duplicate use declaration", head.line, head.column );
                used = true;
                for ( const auto* tok : { &c, &d } ) {
                    const bool known = std::any_of( model.components.begin(), model.components.end(),
                                                    [&]( const Component& k ) { return k.name() == tok->text; } );
                    if ( !known )
                        throw ParseError( "unknown component '" + tok->text + "'", tok->line, tok->column );
                }
                if ( c.text == d.text )
                    throw ParseError( "system needs two distinct components", d.line, d.column );
                sys.c = c.text;
                sys.d = d.text;
            }
            else if ( head.text == "connect" ) {
                const auto d = cur.word( "a component name" );
                cur.expect( "." );
                const auto dp = cur.word( "a port name" );
                cur.expect( "->" );
                const auto c = cur.word( "a component name" );
                cur.expect( "." );
                const auto cp = cur.word( "a port name" );
                cur.finish();
                if ( !used )
                    throw ParseError( "connect before use", head.line, head.column );
                if ( d.text != sys.d )
                    throw ParseError( "connection source must be component '" + sys.d + "'", d.line, d.column );
                if ( c.text != sys.c )
                    throw ParseError( "connection target must be component '" + sys.c + "'", c.line, c.column );
                if ( dp.text != cp.text )
                    throw ParseError( "connected ports must share a name", cp.line, cp.column );
                const auto* out = model.component( sys.d ).find_port( dp.text );
                const auto* inp = model.component( sys.c ).find_port( cp.text );
                if ( out == nullptr )
                    throw ParseError( "unknown port '" + dp.text + "' in component '" + sys.d + "'", dp.line,
                                      dp.column );
                if ( inp == nullptr )
                    throw ParseError( "unknown port '" + cp.text + "' in component '" + sys.c + "'", cp.line,
                                      cp.column );
                if ( out->direction != Direction::out || inp->direction != Direction::in )
                    throw ParseError( "connection mismatch on port '" + dp.text + "'", dp.line, dp.column );
                if ( out->domain != inp->domain )
                    throw ParseError( "domain mismatch on port '" + dp.text + "'", dp.line, dp.column );
                if ( std::find( sys.connections.begin(), sys.connections.end(), dp.text ) != sys.connections.end() )
                    throw ParseError( "duplicate connection on port '" + dp.text + "'", dp.line, dp.column );
                sys.connections.push_back( dp.text );
            }
            else if ( head.text == "bind" ) {
                const auto port = cur.word( "a port name" );
                cur.expect( "." );
                const auto kind = parse_kind( cur.word( "an event kind" ) );
                cur.expect( ":=" );
                const auto cft = cur.word( "a CFT name" );
                cur.finish();
                binds.push_back( { { port.text, kind }, cft } );
            }
            else if ( head.text == "check" ) {
                const auto cft = cur.word( "a CFT name" );
                cur.finish();
                if ( check )
                    throw ParseError( "duplicate check declaration", head.line, head.column );
                check = cft;
            }
            else {
                throw ParseError( "unexpected '" + head.text + "' in system block", head.line, head.column );
            }
        }
        if ( in.peek( ';' ) )
            in.expect( ';' );
    }
    in.expect( '}' );

    if ( !used )
        throw ParseError( "system '" + name.text + "' has no use declaration", name.line, name.column );
    if ( !check )
        throw ParseError( "system '" + name.text + "' has no check declaration", name.line, name.column );

    auto find_cft = [&]( const Token& tok ) -> const CFT& {
        for ( const auto& c : model.cfts )
            if ( c.name == tok.text )
                return c;
        throw ParseError( "unknown CFT '" + tok.text + "'", tok.line, tok.column );
    };
    for ( const auto& b : binds ) {
        const auto& bound = find_cft( b.cft );
        if ( std::find( sys.connections.begin(), sys.connections.end(), b.event.port ) == sys.connections.end() )
            throw ParseError( "bound event '" + to_string( b.event ) + "' is not on a connected port", b.cft.line,
                              b.cft.column );
        if ( bound.owner != sys.d )
            throw ParseError( "CFT '" + bound.name + "' is not a CFT of component '" + sys.d + "'", b.cft.line,
                              b.cft.column );
        if ( bound.output != b.event )
            throw ParseError( "binding mismatch: event '" + to_string( b.event ) + "' bound to CFT '" + bound.name +
                                  "' with output '" + to_string( bound.output ) + "'",
                              b.cft.line, b.cft.column );
        if ( !sys.bindings.emplace( b.event, bound.name ).second )
            throw ParseError( "duplicate binding for event '" + to_string( b.event ) + "'", b.cft.line, b.cft.column );
    }
    const auto& checked = find_cft( *check );
    if ( checked.owner != sys.c )
        throw ParseError( "CFT '" + checked.name + "' is not a CFT of component '" + sys.c + "'", check->line,
                          check->column );
    for ( const auto& event : checked.formula.events() )
        if ( std::find( sys.connections.begin(), sys.connections.end(), event.port ) != sys.connections.end() &&
             !sys.bindings.count( event ) )
            throw ParseError( "unbound connected event '" + to_string( event ) + "'", check->line, check->column );
    sys.check = checked.name;
    return sys;
}

} // namespace detail

/// Parses a model file. Every error carries the line and column it was
/// detected at.
inline Model parse_model( std::string_view text )
{
    Model model;
    detail::ModelScanner in( text );
    std::set<std::string> names;
    auto claim = [&]( const detail::Token& tok ) {
        if ( !names.insert( tok.text ).second )
            throw ParseError( "duplicate name '" + tok.text + "'", tok.line, tok.column );
    };
    while ( !in.at_end() ) {
        const auto keyword = in.word();
        if ( keyword.text == "component" ) {
            const auto name = in.word();
            claim( name );
            model.components.push_back( detail::parse_component_block( in, name ) );
        }
        else if ( keyword.text == "cft" ) {
            const auto name = in.word();
            claim( name );
            const auto on = in.word();
            if ( on.text != "on" )
                throw ParseError( "expected 'on', found '" + on.text + "'", on.line, on.column );
            const auto owner = in.word();
            auto it = std::find_if( model.components.begin(), model.components.end(),
                                    [&]( const Component& c ) { return c.name() == owner.text; } );
            if ( it == model.components.end() )
                throw ParseError( "unknown component '" + owner.text + "'", owner.line, owner.column );
            model.cfts.push_back( detail::parse_cft_block( in, name, owner, *it ) );
        }
        else if ( keyword.text == "system" ) {
            const auto name = in.word();
            claim( name );
            model.systems.push_back( detail::parse_system_block( in, name, model ) );
        }
        else {
            throw ParseError( "expected 'component', 'cft' or 'system', found '" + keyword.text + "'", keyword.line,
                              keyword.column );
        }
    }
    return model;
}

inline std::string serialize_component( const Component& comp )
{
    std::string out = "component " + comp.name() + " {\n";
    for ( const auto& p : comp.ports() ) {
        out += std::string( "  " ) + ( p.direction == Direction::in ? "in " : "out " ) + p.name + " : {";
        for ( std::size_t i = 0; i < p.domain.size(); ++i )
            out += ( i ? "," : "" ) + p.domain[i];
        out += "};\n";
    }
    out += "  init " + comp.state_name( comp.initial() ) + ";\n";
    for ( const auto& tr : comp.transitions() )
        out += "  " + tr.from + " -- " + to_string( tr.message ) + " --> " + tr.to + ";\n";
    return out + "}\n";
}

/// Canonical text form; `parse_model( serialize_model( m ) ) == m` for every
/// parsed model whose states all occur in its transitions or as init.
inline std::string serialize_model( const Model& model )
{
    std::string out;
    for ( const auto& c : model.components )
        out += serialize_component( c ) + "\n";
    for ( const auto& c : model.cfts ) {
        out += "cft " + c.name + " on " + c.owner + " {\n";
        out += "  output " + to_string( c.output ) + ";\n";
        out += "  formula " + to_string( c.formula ) + ";\n}\n\n";
    }
    for ( const auto& s : model.systems ) {
        out += "system " + s.name + " {\n";
        out += "  use " + s.c + " " + s.d + ";\n";
        for ( const auto& p : s.connections )
            out += "  connect " + s.d + "." + p + " -> " + s.c + "." + p + ";\n";
        for ( const auto& [event, cft] : s.bindings )
            out += "  bind " + to_string( event ) + " := " + cft + ";\n";
        out += "  check " + s.check + ";\n}\n\n";
    }
    if ( !out.empty() )
        out.pop_back();
    return out;
}

} // namespace cftc
