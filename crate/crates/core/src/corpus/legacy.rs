//! The `<sentence>####<quad list>` benchmark line format.

use std::fmt;
use std::str::FromStr;

use super::{CorpusError, Provenance, Quad, Sample, Sentiment, Term};

const SEPARATOR: &str = "####";
const IMPLICIT_MARKER: &str = "NULL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Aspect,
    Opinion,
    Category,
    Sentiment,
}

impl Element {
    fn name(self) -> &'static str {
        match self {
            Element::Aspect => "aspect",
            Element::Opinion => "opinion",
            Element::Category => "category",
            Element::Sentiment => "sentiment",
        }
    }
}

/// Positional meaning of the four entries of each legacy quad list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementOrder([Element; 4]);

impl ElementOrder {
    pub fn new(order: [Element; 4]) -> Result<Self, String> {
        for element in [Element::Aspect, Element::Opinion, Element::Category, Element::Sentiment] {
            if order.iter().filter(|e| **e == element).count() != 1 {
                return Err(format!("element order must name {} exactly once", element.name()));
            }
        }
        Ok(ElementOrder(order))
    }

    pub fn elements(&self) -> [Element; 4] {
        self.0
    }

    fn slot(&self, element: Element) -> usize {
        self.0.iter().position(|e| *e == element).expect("validated order")
    }
}

impl Default for ElementOrder {
    /// aspect, category, sentiment, opinion
    fn default() -> Self {
        ElementOrder([Element::Aspect, Element::Category, Element::Sentiment, Element::Opinion])
    }
}

impl FromStr for ElementOrder {
    type Err = String;

    /// Parses a comma separated list such as `aspect,category,sentiment,opinion`
    /// (single letters `a,c,s,o` also work).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<Element> = s
            .split(',')
            .map(|p| match p.trim().to_ascii_lowercase().as_str() {
                "aspect" | "a" => Ok(Element::Aspect),
                "opinion" | "o" => Ok(Element::Opinion),
                "category" | "c" => Ok(Element::Category),
                "sentiment" | "s" => Ok(Element::Sentiment),
                other => Err(format!("unknown quad element {other:?}")),
            })
            .collect::<Result<_, _>>()?;
        let order: [Element; 4] = parts
            .try_into()
            .map_err(|_| "element order needs exactly four entries".to_string())?;
        ElementOrder::new(order)
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|e| e.name()).collect();
        f.write_str(&names.join(","))
    }
}

/// Parses one legacy line into a raw sample with the given id.
pub fn parse_legacy_line(line: &str, order: &ElementOrder, id: &str) -> Result<Sample, CorpusError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let (sentence, literal) = line
        .split_once(SEPARATOR)
        .ok_or_else(|| CorpusError::MalformedLine(format!("missing {SEPARATOR:?} separator")))?;
    let rows = parse_list_literal(literal).map_err(CorpusError::MalformedLine)?;
    let mut quads = Vec::with_capacity(rows.len());
    for row in rows {
        let row: [String; 4] = row.try_into().map_err(|r: Vec<String>| {
            CorpusError::MalformedLine(format!("quad has {} elements, expected 4", r.len()))
        })?;
        let term = |element: Element| -> Result<Term, CorpusError> {
            let raw = &row[order.slot(element)];
            if raw.trim() == IMPLICIT_MARKER {
                Ok(Term::Implicit)
            } else {
                Term::explicit(raw).ok_or_else(|| CorpusError::MalformedLine(format!("blank {} term", element.name())))
            }
        };
        let category = row[order.slot(Element::Category)].trim();
        if category.is_empty() {
            return Err(CorpusError::MalformedLine("blank category".into()));
        }
        let sentiment: Sentiment = row[order.slot(Element::Sentiment)].parse()?;
        quads.push(Quad::new(
            term(Element::Aspect)?,
            term(Element::Opinion)?,
            category,
            sentiment,
        ));
    }
    Sample::new(id, sentence, quads, Provenance::Raw)
}

/// Renders a sample back into the legacy line format. Ids and provenance are
/// not representable and are dropped.
pub(super) fn render_legacy_line(sample: &Sample, order: &ElementOrder) -> String {
    let rows: Vec<Vec<String>> = sample
        .quads()
        .iter()
        .map(|quad| {
            order
                .elements()
                .iter()
                .map(|element| match element {
                    Element::Aspect => quad.aspect.text().unwrap_or(IMPLICIT_MARKER).to_string(),
                    Element::Opinion => quad.opinion.text().unwrap_or(IMPLICIT_MARKER).to_string(),
                    Element::Category => quad.category.clone(),
                    Element::Sentiment => quad.sentiment.as_str().to_string(),
                })
                .collect()
        })
        .collect();
    let literal = serde_json::to_string(&rows).expect("string lists always serialize");
    format!("{}{}{}", sample.text(), SEPARATOR, literal)
}

/// Parses a nested list of string literals such as `[['a', "b"], ['c']]`.
/// Both quote styles are accepted since the public files use Python reprs.
fn parse_list_literal(input: &str) -> Result<Vec<Vec<String>>, String> {
    let mut cursor = Cursor {
        chars: input.char_indices().peekable(),
        src: input,
    };
    cursor.expect('[')?;
    let mut rows = Vec::new();
    if !cursor.eat(']') {
        loop {
            cursor.expect('[')?;
            let mut row = Vec::new();
            if !cursor.eat(']') {
                loop {
                    row.push(cursor.string()?);
                    if cursor.eat(']') {
                        break;
                    }
                    cursor.expect(',')?;
                }
            }
            rows.push(row);
            if cursor.eat(']') {
                break;
            }
            cursor.expect(',')?;
        }
    }
    cursor.skip_ws();
    if let Some((at, _)) = cursor.chars.peek() {
        return Err(format!("trailing input at byte {at} of quad list"));
    }
    if rows.is_empty() {
        return Err("empty quad list".into());
    }
    Ok(rows)
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.chars.peek().is_some_and(|(_, c)| *c == want) {
            self.chars.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<(), String> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("{want:?}")))
        }
    }

    fn unexpected(&mut self, wanted: &str) -> String {
        match self.chars.peek() {
            Some((at, c)) => format!("expected {wanted} at byte {at}, found {c:?}"),
            None => format!("expected {wanted}, found end of input ({} bytes)", self.src.len()),
        }
    }

    fn string(&mut self) -> Result<String, String> {
        self.skip_ws();
        let quote = match self.chars.peek() {
            Some((_, c @ ('\'' | '"'))) => *c,
            _ => return Err(self.unexpected("a quoted string")),
        };
        self.chars.next();
        let mut out = String::new();
        loop {
            match self.chars.next() {
                None => return Err("unterminated string literal".into()),
                Some((_, c)) if c == quote => return Ok(out),
                Some((_, '\\')) => match self.chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 't')) => out.push('\t'),
                    Some((_, c)) => out.push(c),
                    None => return Err("unterminated escape".into()),
                },
                Some((_, c)) => out.push(c),
            }
        }
    }
}
