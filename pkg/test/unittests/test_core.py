"""
Unit tests for the autoformal.core module
"""

import unittest

import numpy as np

from autoformal.core import (_Registry as Registry, component, component_type,
                             get_rng, STREAM_SPLIT, STREAM_INIT, STREAM_TRAIN,
                             AutoformalError, DataError, DivergenceError, ShapeMismatch)


class TestRegistry(unittest.TestCase):

    def setUp(self):
        self.registry = Registry.__new__(Registry)  # hack to create new instance for each test
        self.registry.__init__()

    class ComponentBaseType(object):

        required_attributes = ["step", "step_backward"]

    class ConcreteType(ComponentBaseType):
        name = "ItsName"
        step = True

        def step_backward(self):
            pass

    def test_always_returns_same_instance(self):
        for unused in range(10):
            self.assertEqual(Registry(), Registry())

    def test_add_component_type_without_required_attributes(self):
        self.assertRaises(TypeError, self.registry.add_component_type, object)

    def test_register_should_use_name_attribute(self):
        self.registry.add_component_type(self.ComponentBaseType)
        self.registry.register(self.ConcreteType)
        self.assertIn("ItsName", self.registry.components[self.ComponentBaseType])

    def test_register_should_fall_back_to_class_name(self):
        class Nameless(self.ComponentBaseType):
            step = 1
            step_backward = 2
        self.registry.add_component_type(self.ComponentBaseType)
        self.registry.register(Nameless)
        self.assertIn("Nameless", self.registry.components[self.ComponentBaseType])

    def test_register_incomplete_component_raises(self):
        class Incomplete(self.ComponentBaseType):
            step = 1
        self.registry.add_component_type(self.ComponentBaseType)
        self.assertRaises(TypeError, self.registry.register, Incomplete)

    def test_register_unknown_type_raises(self):
        self.assertRaises(TypeError, self.registry.register, self.ConcreteType)


class TestComponentDecorators(unittest.TestCase):

    def test_subtype_of_registered_type_cannot_be_a_type(self):
        @component_type
        class Base(object):
            required_attributes = ()

        def register_subtype():
            @component_type
            class Sub(Base):
                required_attributes = ()
        self.assertRaises(TypeError, register_subtype)

    def test_component_appears_in_registry(self):
        @component_type
        class Shape(object):
            required_attributes = ("area",)

        @component
        class Square(Shape):
            name = "square"
            area = 4
        self.assertIs(Registry().components[Shape]["square"], Square)


class TestErrors(unittest.TestCase):

    def test_hierarchy(self):
        self.assertTrue(issubclass(DataError, AutoformalError))
        self.assertTrue(issubclass(DivergenceError, AutoformalError))
        self.assertTrue(issubclass(ShapeMismatch, DataError))


class TestGetRng(unittest.TestCase):

    def test_same_seed_and_stream_give_same_draws(self):
        a = get_rng(42, STREAM_TRAIN).random(5)
        b = get_rng(42, STREAM_TRAIN).random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_are_independent(self):
        a = get_rng(42, STREAM_SPLIT).random(5)
        b = get_rng(42, STREAM_INIT).random(5)
        self.assertFalse(np.allclose(a, b))

    def test_bit_generator_is_pcg64(self):
        self.assertIsInstance(get_rng(0).bit_generator, np.random.PCG64)


if __name__ == '__main__':
    unittest.main()
