__all__ = ['commands', 'core', 'corpus', 'datastore', 'evaluation', 'formatting',
           'lexing', 'model', 'parameters', 'records', 'training']

__version__ = "0.1dev"
