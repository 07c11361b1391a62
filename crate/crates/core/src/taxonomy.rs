//! Registries of narrative functions.
//!
//! [`FunctionSymbol`] is the closed 34-symbol alphabet used by every other
//! module. [`all_functions`] returns the full definitions in canonical row
//! order, and [`legacy_functions`] the 31 functions of Propp's original
//! morphology, kept as a static reference table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("unknown function symbol {0:?}")]
    UnknownSymbol(String),
}

/// One of the 34 narrative functions.
///
/// Tokens are case-sensitive: 26 single uppercase letters plus eight
/// two-character tokens (`Ch`, `Fr`, `Fa`, `Re`, `De`, `Em`, `Fi`, `Lo`).
/// The enum order is the canonical registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionSymbol {
    InitialSituation,
    Interdiction,
    InterdictionViolation,
    Reconnaissance,
    Delivery,
    Trickery,
    Complicity,
    Villainy,
    Lack,
    Mediation,
    Counteraction,
    Departure,
    FirstDonor,
    HeroReaction,
    GetPromoted,
    Transfer,
    Struggle,
    Marking,
    VictoryOrDefeat,
    LiquidationOfLack,
    ReturnAndPursuit,
    Transformation,
    Rescue,
    UnrecognizedArrival,
    Setting,
    UnfoundedClaims,
    Transfiguration,
    Solution,
    Recognition,
    Exposure,
    DifficultTask,
    Emotion,
    Beyond,
    MemoryLoss,
}

/// Number of functions in the registry.
pub const FUNCTION_COUNT: usize = 34;

impl FunctionSymbol {
    /// All symbols in registry order.
    pub const ALL: [FunctionSymbol; FUNCTION_COUNT] = {
        use FunctionSymbol::*;
        [
            InitialSituation,
            Interdiction,
            InterdictionViolation,
            Reconnaissance,
            Delivery,
            Trickery,
            Complicity,
            Villainy,
            Lack,
            Mediation,
            Counteraction,
            Departure,
            FirstDonor,
            HeroReaction,
            GetPromoted,
            Transfer,
            Struggle,
            Marking,
            VictoryOrDefeat,
            LiquidationOfLack,
            ReturnAndPursuit,
            Transformation,
            Rescue,
            UnrecognizedArrival,
            Setting,
            UnfoundedClaims,
            Transfiguration,
            Solution,
            Recognition,
            Exposure,
            DifficultTask,
            Emotion,
            Beyond,
            MemoryLoss,
        ]
    };

    pub fn token(self) -> &'static str {
        DEFS[self.index()].token
    }

    /// Position in registry order, `0..34`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn def(self) -> &'static FunctionDef {
        lookup(self)
    }
}

impl fmt::Display for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for FunctionSymbol {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_symbol(s)
    }
}

impl Serialize for FunctionSymbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for FunctionSymbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        parse_symbol(&token).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionStatus {
    /// Carried over from Propp unchanged.
    Original,
    /// Propp's function with an extended interpretation.
    Revised,
    /// No counterpart in Propp's list.
    New,
}

/// Human guidance for deciding which function a passage realizes. Advisory
/// only; nothing in the crate classifies prose from these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisionHint {
    /// Where the sentence sits in the text, or ordering constraints.
    Position,
    /// The narrative goal the passage accomplishes.
    Goal,
    /// Which role (main or non-main character) acts.
    Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionDef {
    pub symbol: FunctionSymbol,
    #[serde(skip)]
    token: &'static str,
    pub name: &'static str,
    pub description: &'static str,
    pub status: FunctionStatus,
    pub division_hints: &'static [DivisionHint],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LegacyFunctionDef {
    pub symbol: &'static str,
    pub name: &'static str,
    pub description: &'static str,
}

macro_rules! def {
    ($sym:ident, $tok:literal, $name:literal, $desc:literal, $status:ident, [$($hint:ident),*]) => {
        FunctionDef {
            symbol: FunctionSymbol::$sym,
            token: $tok,
            name: $name,
            description: $desc,
            status: FunctionStatus::$status,
            division_hints: &[$(DivisionHint::$hint),*],
        }
    };
}

static DEFS: [FunctionDef; FUNCTION_COUNT] = [
    def!(InitialSituation, "A", "Initial situation", "The initial scene", Original, [Position]),
    def!(Interdiction, "B", "Interdiction", "A prohibition is imposed on the hero", Original, [Position]),
    def!(InterdictionViolation, "C", "Interdiction violation", "The interdiction is violated", Original, [Position]),
    def!(Reconnaissance, "D", "Reconnaissance", "The enemy reconnaissance", Original, []),
    def!(Delivery, "E", "Delivery", "The character obtains intelligence/response", Revised, [Role]),
    def!(Trickery, "F", "Trickery", "Foreshadowing/ traps/suspense/hints", Revised, []),
    def!(Complicity, "G", "Complicity", "The victim submits to deception", Original, []),
    def!(Villainy, "H", "Villainy", "The enemy's crime/ambition", Revised, []),
    def!(Lack, "I", "Lack", "The scarcity of the protagonist", Original, []),
    def!(Mediation, "J", "Mediation", "Misfortune is made known", Original, []),
    def!(Counteraction, "K", "Counteraction", "The protagonist's response/psychological", Revised, [Role]),
    def!(Departure, "L", "Departure", "Protagonist on the journey", Revised, []),
    def!(FirstDonor, "M", "1st donor", "The giver or the golden finger appears", Revised, []),
    def!(HeroReaction, "N", "Hero's reaction", "The hero reacts to the giver", Revised, []),
    def!(GetPromoted, "O", "Get promoted", "Acquires items or enhances his abilities", Revised, []),
    def!(Transfer, "P", "Transfer", "Spatial transfer", Original, [Goal]),
    def!(Struggle, "Q", "Struggle", "The hero and enemy engage in direct conflict", Original, []),
    def!(Marking, "R", "Marking", "The hero is marked or identified", Original, []),
    def!(VictoryOrDefeat, "S", "Victory or defeat", "The victory or defeat of the character", Revised, []),
    def!(LiquidationOfLack, "T", "Liquidation of lack", "Villainy or lack resolved", Original, []),
    def!(ReturnAndPursuit, "U", "Return and Pursuit", "The hero returns. The enemy chases the hero", Original, []),
    def!(Transformation, "Ch", "Transformation", "Change in role or power relationship", New, []),
    def!(Rescue, "V", "Rescue", "The hero is saved from pursuit or danger", Original, []),
    def!(UnrecognizedArrival, "W", "Unrecognized arrival", "Protagonist is not recognized either actively or passively", Original, []),
    def!(Setting, "Fr", "Setting", "the strength/Ability system setting", New, []),
    def!(UnfoundedClaims, "X", "Unfounded claims", "The protagonist is confronted with unreasonable demands, unfair competitions or difficulties", Original, []),
    def!(Transfiguration, "Fa", "Transfiguration", "The protagonist's beautification, casual clothes or pseudonyms", Revised, []),
    def!(Solution, "Z", "Solution", "The task is accomplished or resolved", Original, []),
    def!(Recognition, "Re", "Recognition", "The hero is recognized/acknowledged", Original, []),
    def!(Exposure, "De", "Exposure", "The enemy's identity or deception is exposed", Original, []),
    def!(DifficultTask, "Y", "Difficult task", "The hero is given a difficult task", Original, []),
    def!(Emotion, "Em", "Emotion", "The changes of the characters' emotions", Revised, []),
    def!(Beyond, "Fi", "Beyond", "To complete or beyond unreasonable demands", Revised, []),
    def!(MemoryLoss, "Lo", "Memory Loss", "The protagonist's active/passive memory loss", New, []),
];

macro_rules! legacy {
    ($sym:literal, $name:literal, $desc:literal) => {
        LegacyFunctionDef { symbol: $sym, name: $name, description: $desc }
    };
}

static LEGACY: [LegacyFunctionDef; 31] = [
    legacy!("α", "Initial situation", "The initial scene at the beginning of the story"),
    legacy!("γ", "Interdiction", "A prohibition is imposed on the hero"),
    legacy!("δ", "Interdiction violation", "The interdiction is violated"),
    legacy!("ε", "Reconnaissance", "The villain attempts to obtain information"),
    legacy!("ξ", "Delivery", "The villain gains information or an object"),
    legacy!("η", "Trickery", "The villain deceives the hero to gain an advantage"),
    legacy!("θ", "Complicity", "The victim submits to deception"),
    legacy!("A", "Villainy", "The villain causes harm or injury"),
    legacy!("a", "Lack", "The scarcity of the protagonist"),
    legacy!("B", "Mediation", "Misfortune is made known"),
    legacy!("C", "Counteraction", "The hero reacts to the villain's actions"),
    legacy!("↑", "Departure", "The hero leaves home"),
    legacy!("D", "1st donor function", "The hero is tested by a potential donor"),
    legacy!("E", "Hero's reaction", "The hero reacts to the test"),
    legacy!("F", "Receipt of agent", "The hero acquires a magical agent"),
    legacy!("G", "Transfer", "The hero is directed or taken to new location"),
    legacy!("H", "Struggle", "The hero and villain engage in direct conflict"),
    legacy!("J", "Marking", "The hero is marked or identified"),
    legacy!("I", "Victory", "The hero defeats the villain."),
    legacy!("K", "Liquidation of lack", "Villainy or lack resolved"),
    legacy!("↓", "Return and Pursuit", "The hero returns. The villain chases the hero"),
    legacy!("Rs", "Rescue", "The hero is saved from pursuit or danger"),
    legacy!("O", "Unrecognized arrival", "The situation where the protagonist is not recognized either actively or passively"),
    legacy!("U", "Punishment", "The villain receives punishment or consequences"),
    legacy!("L", "Unfounded claims", "The protagonist is confronted with unreasonable demands, unfair competitions or difficulties"),
    legacy!("T", "Transfiguration", "The hero undergoes a transformation."),
    legacy!("W", "Wedding", "The hero marries or is rewarded"),
    legacy!("N", "Solution", "The task is accomplished or resolved"),
    legacy!("Q", "Recognition", "The hero is recognized or acknowledged"),
    legacy!("Ex", "Exposure", "The villain's identity or deception is exposed"),
    legacy!("M", "Difficult task", "The hero is given a difficult task"),
];

/// Resolves an exact, case-sensitive token.
pub fn parse_symbol(token: &str) -> Result<FunctionSymbol, TaxonomyError> {
    DEFS.iter()
        .find(|d| d.token == token)
        .map(|d| d.symbol)
        .ok_or_else(|| TaxonomyError::UnknownSymbol(token.to_string()))
}

pub fn lookup(symbol: FunctionSymbol) -> &'static FunctionDef {
    &DEFS[symbol.index()]
}

pub fn all_functions() -> &'static [FunctionDef] {
    &DEFS
}

pub fn legacy_functions() -> &'static [LegacyFunctionDef] {
    &LEGACY
}

pub fn legacy_lookup(symbol: &str) -> Option<&'static LegacyFunctionDef> {
    LEGACY.iter().find(|d| d.symbol == symbol)
}

/// Line-delimited JSON export of both registries, one definition per line.
pub fn export_registry_jsonl(legacy: bool) -> String {
    let mut out = String::new();
    if legacy {
        for def in legacy_functions() {
            out.push_str(&serde_json::to_string(def).expect("static registry serializes"));
            out.push('\n');
        }
    } else {
        for def in all_functions() {
            out.push_str(&serde_json::to_string(def).expect("static registry serializes"));
            out.push('\n');
        }
    }
    out
}
