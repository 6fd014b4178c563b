"""
Tokenizers for Mizar statements and LaTeX-rendered mathematical sentences.

Both tokenizers are deterministic and lossless with respect to
non-whitespace characters: joining the tokens with single spaces gives the
canonical tokenized form used in the corpus files.

Classes
-------

SymbolTable - the symbols, identifiers and keywords of a Mizar article,
              supporting longest-match queries.
TokenSequence - an immutable list of tokens tagged with its language.

Functions
---------

tokenize_mizar() - longest-match segmentation of a Mizar statement.
tokenize_latex() - split a LaTeX sentence at delimiters, keeping control
                   sequences intact.
strip_markup()   - remove cross-referencing and itemization markup.


:license: BSD 2-clause, see LICENSE for details.
"""
import logging
import string

from .core import DataError

logger = logging.getLogger("autoformal")

LATEX_SIDE = "latex"
MIZAR_SIDE = "mizar"
LANGUAGES = (LATEX_SIDE, MIZAR_SIDE)

# Built into the Mizar language rather than declared in article vocabularies.
MIZAR_SPECIAL_SYMBOLS = frozenset([
    ",", ";", ":", "(", ")", "[", "]", "{", "}", "=", "&", "->", ".=", "...", "$1",
    "$2", "$3", "$4", "$5", "$6", "$7", "$8", "$10", "(#", "#)", ".",
])

MIZAR_KEYWORDS = frozenset("""
according aggregate all and antonym are as associativity assume asymmetry attr
be begin being by canceled case cases cluster coherence commutativity
compatibility connectedness consider consistency constructors contradiction
correctness def deffunc define definition definitions defpred do does end
environ equals ex exactly existence for from func given hence hereby holds
idempotence identify if iff implies involutiveness irreflexivity is it let means
mode non not notation notations now of or otherwise over per pred prefix
projectivity proof provided qua reconsider reduce reducibility redefine
reflexivity registration registrations requirements reserve sch scheme schemes
section selector set sethood st struct such suppose symmetry synonym take that
the then theorem theorems thesis thus to transitivity uniqueness vocabularies
when where with wrt
""".split())

LATEX_DELIMITERS = frozenset("${}()[]^_,.")

# command -> number of mandatory brace arguments removed along with it
DEFAULT_BLACKLIST = {
    "\\label": 1,
    "\\ref": 1,
    "\\eqref": 1,
    "\\pageref": 1,
    "\\cite": 1,
    "\\item": 0,
    "\\noindent": 0,
    "\\par": 0,
    "\\newline": 0,
    "\\smallskip": 0,
    "\\medskip": 0,
    "\\bigskip": 0,
}
DEFAULT_ENVIRONMENTS = ("itemize", "enumerate", "description")

_TEX_LETTERS = frozenset(string.ascii_letters)


class UnknownCharacter(DataError):

    def __init__(self, position, character=""):
        self.position = position
        self.character = character
        DataError.__init__(self, "unknown character %r at offset %d" % (character, position))


class UnbalancedBraces(DataError):

    def __init__(self, position):
        self.position = position
        DataError.__init__(self, "brace group opened at offset %d never closes" % position)


def _is_identifier_char(ch):
    return ch.isalnum() or ch in "_'"


def _is_word(entry):
    return all(_is_identifier_char(ch) for ch in entry)


def _check_entry(entry):
    if not entry or any(ch.isspace() for ch in entry):
        raise DataError("Symbol table entries must be non-empty and contain no whitespace: %r" % entry)


class SymbolTable(object):
    """
    The symbols, identifiers and keywords known when tokenizing one Mizar
    article. Unless `builtins` is False, the Mizar special symbols and
    reserved words are added to the user-supplied entries.
    """
    sections = ("#SYMBOLS", "#IDENTIFIERS", "#KEYWORDS")

    def __init__(self, symbols=(), identifiers=(), keywords=(), builtins=True):
        self.symbols = set(symbols)
        self.identifiers = set(identifiers)
        self.keywords = set(keywords)
        if builtins:
            self.symbols |= MIZAR_SPECIAL_SYMBOLS
            self.keywords |= MIZAR_KEYWORDS
        for entry in self.entries:
            _check_entry(entry)
        self._lengths = sorted(set(len(entry) for entry in self.entries), reverse=True)
        self._all = frozenset(self.entries)

    @property
    def entries(self):
        return self.symbols | self.identifiers | self.keywords

    def __contains__(self, entry):
        return entry in self._all

    def __len__(self):
        return len(self._all)

    def longest_match(self, text, pos):
        """Return the longest entry that occurs in `text` at offset `pos`, or None."""
        for length in self._lengths:
            if text[pos:pos + length] in self._all:
                return text[pos:pos + length]
        return None

    @classmethod
    def from_file(cls, path, builtins=True):
        """
        Read a symbol-table file: one entry per line, grouped under the
        section headers #SYMBOLS, #IDENTIFIERS and #KEYWORDS.
        """
        groups = dict((section, []) for section in cls.sections)
        current = "#SYMBOLS"
        with open(path, encoding="utf-8") as f:
            for line in f:
                entry = line.strip()
                if not entry:
                    continue
                if entry in groups:
                    current = entry
                else:
                    groups[current].append(entry)
        logger.debug("Read %d symbols, %d identifiers, %d keywords from %s",
                     len(groups["#SYMBOLS"]), len(groups["#IDENTIFIERS"]),
                     len(groups["#KEYWORDS"]), path)
        return cls(groups["#SYMBOLS"], groups["#IDENTIFIERS"], groups["#KEYWORDS"],
                   builtins=builtins)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for section, entries in zip(self.sections,
                                        (self.symbols, self.identifiers, self.keywords)):
                f.write(section + "\n")
                for entry in sorted(entries):
                    f.write(entry + "\n")


class TokenSequence(object):
    """The tokens of one statement, in either language."""

    def __init__(self, tokens, language):
        if language not in LANGUAGES:
            raise ValueError("language must be one of %s" % ", ".join(LANGUAGES))
        self.tokens = tuple(tokens)
        for token in self.tokens:
            if not token or any(ch.isspace() for ch in token):
                raise ValueError("Invalid token %r" % token)
        self.language = language

    @classmethod
    def from_line(cls, line, language):
        """Build from a canonical tokenized line (tokens separated by spaces)."""
        return cls(line.split(), language)

    def joined(self):
        return " ".join(self.tokens)

    __str__ = joined

    def __repr__(self):
        return "TokenSequence(%r, %r)" % (self.joined(), self.language)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, item):
        return self.tokens[item]

    def __eq__(self, other):
        return (isinstance(other, TokenSequence) and self.tokens == other.tokens
                and self.language == other.language)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.tokens, self.language))


def tokenize_mizar(raw, table):
    """
    Segment a Mizar statement into tokens.

    At each position the longest symbol-table entry wins, unless the entry is
    word-like (only identifier characters) and a longer identifier run starts
    at the same position, in which case the whole run is one token. Without
    a table match, a maximal run of letters, digits, underscores and
    apostrophes is consumed.
    """
    tokens = []
    pos = 0
    n = len(raw)
    while pos < n:
        ch = raw[pos]
        if ch.isspace():
            pos += 1
            continue
        match = table.longest_match(raw, pos)
        run = pos
        while run < n and _is_identifier_char(raw[run]):
            run += 1
        run -= pos
        if match is not None and (len(match) >= run or not _is_word(match)):
            tokens.append(match)
            pos += len(match)
        elif run:
            tokens.append(raw[pos:pos + run])
            pos += run
        else:
            raise UnknownCharacter(pos, ch)
    return TokenSequence(tokens, MIZAR_SIDE)


def tokenize_latex(raw):
    """
    Split a LaTeX sentence into tokens.

    Dollar signs, braces, brackets, parentheses, carets, underscores, commas
    and periods are single tokens. A backslash followed by letters is one
    control-word token; a backslash followed by any other non-space character
    is a two-character control symbol. Everything else is split at spaces
    and delimiters.
    """
    tokens = []
    pos = 0
    n = len(raw)
    while pos < n:
        ch = raw[pos]
        if ch.isspace():
            pos += 1
        elif ch == "\\":
            end = pos + 1
            while end < n and raw[end] in _TEX_LETTERS:
                end += 1
            if end == pos + 1 and end < n and not raw[end].isspace():
                end += 1
            tokens.append(raw[pos:end])
            pos = end
        elif ch in LATEX_DELIMITERS:
            tokens.append(ch)
            pos += 1
        else:
            end = pos + 1
            while end < n and not (raw[end].isspace() or raw[end] in LATEX_DELIMITERS
                                   or raw[end] == "\\"):
                end += 1
            tokens.append(raw[pos:end])
            pos = end
    return TokenSequence(tokens, LATEX_SIDE)


def _command_at(raw, pos):
    end = pos + 1
    while end < len(raw) and raw[end] in _TEX_LETTERS:
        end += 1
    return raw[pos:end]


def _group_end(raw, pos, opening, closing):
    """Offset just past the group opened at `pos`; escaped delimiters do not count."""
    depth = 0
    i = pos
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            i += 2
            continue
        if ch == opening:
            depth += 1
        elif ch == closing:
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    raise UnbalancedBraces(pos)


def strip_markup(raw, blacklist=None, environments=DEFAULT_ENVIRONMENTS):
    """
    Remove cross-referencing and itemization commands from a LaTeX sentence.

    Blacklisted commands are deleted together with an optional `[...]`
    argument and their mandatory brace arguments. `\\begin{env}` and
    `\\end{env}` markers of the listed environments are deleted, their
    content is kept. Everything else, including font commands, is untouched.
    """
    if blacklist is None:
        blacklist = DEFAULT_BLACKLIST
    output = []
    pos = 0
    n = len(raw)
    while pos < n:
        ch = raw[pos]
        if ch != "\\":
            output.append(ch)
            pos += 1
            continue
        command = _command_at(raw, pos)
        if command in ("\\begin", "\\end") and raw.startswith("{", pos + len(command)):
            end = _group_end(raw, pos + len(command), "{", "}")
            if raw[pos + len(command) + 1:end - 1].strip() in environments:
                pos = end
                continue
        elif command in blacklist:
            end = pos + len(command)
            if raw.startswith("[", end):
                end = _group_end(raw, end, "[", "]")
            for _ in range(blacklist[command]):
                arg = end
                while arg < n and raw[arg].isspace():
                    arg += 1
                if not raw.startswith("{", arg):
                    break
                end = _group_end(raw, arg, "{", "}")
            pos = end
            continue
        # copy the control sequence verbatim so that an escaped brace is not rescanned
        token = command if len(command) > 1 else raw[pos:pos + 2]
        output.append(token)
        pos += len(token)
    return "".join(output)
